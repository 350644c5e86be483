// View-model for one annotation session. Thin-client rule: after every
// acknowledged mutation the discriminant table is re-fetched, so what the
// view renders is exactly the service's state, never a local simulation.

import { ApiError, Client, DiscriminantRow, SessionView } from "./api.js";

export interface TreebankState {
  sentence: SessionView | null;
  rows: DiscriminantRow[];
  busy: boolean;
  conflict: boolean;
  error: string | null;
  lastPropagated: string[];
}

type Listener = (state: TreebankState) => void;

let requestCounter = 0;

export class TreebankStore {
  private state: TreebankState = {
    sentence: null,
    rows: [],
    busy: false,
    conflict: false,
    error: null,
    lastPropagated: [],
  };
  private listeners: Listener[] = [];

  constructor(private client: Client) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  get current(): TreebankState {
    return this.state;
  }

  private emit(patch: Partial<TreebankState>) {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async load(id: string): Promise<void> {
    this.emit({ busy: true, error: null, conflict: false, lastPropagated: [] });
    try {
      const { sentence, discriminants } = await this.client.discriminants(id);
      this.emit({ sentence, rows: discriminants, busy: false });
    } catch (err) {
      this.emit({ busy: false, error: describe(err) });
    }
  }

  private async refresh(): Promise<void> {
    if (!this.state.sentence) return;
    const { sentence, discriminants } = await this.client.discriminants(
      this.state.sentence.id,
    );
    this.emit({ sentence, rows: discriminants, busy: false });
  }

  async judge(key: string, verdict: "correct" | "incorrect"): Promise<void> {
    const sentence = this.state.sentence;
    if (!sentence || this.state.busy) return;
    this.emit({ busy: true, error: null });
    try {
      const response = await this.client.judge(
        sentence.id,
        key,
        verdict,
        sentence.judged,
        `ui-${Date.now()}-${requestCounter++}`,
      );
      this.emit({ lastPropagated: response.propagated, conflict: false });
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        // another session advanced: reload and let the user retry
        this.emit({ conflict: true });
        await this.refresh();
      } else {
        this.emit({ busy: false, error: describe(err) });
      }
    }
  }

  async undo(): Promise<void> {
    const sentence = this.state.sentence;
    if (!sentence || this.state.busy) return;
    this.emit({ busy: true, error: null, lastPropagated: [] });
    try {
      await this.client.undo(sentence.id);
      await this.refresh();
    } catch (err) {
      this.emit({ busy: false, error: describe(err) });
    }
  }

  async resolve(mode: "unique-required" | "accept-set"): Promise<void> {
    const sentence = this.state.sentence;
    if (!sentence || this.state.busy) return;
    this.emit({ busy: true, error: null });
    try {
      await this.client.resolve(sentence.id, mode);
      await this.refresh();
    } catch (err) {
      this.emit({ busy: false, error: describe(err) });
      await this.refresh();
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  return String(err);
}
