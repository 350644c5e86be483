// View-model for corpus-class review. Edits accumulate in a pending buffer
// and are only reflected in the class table once the service acknowledges
// the batch.

import { ApiError, ClassEdit, ClassView, Client, ReportRow } from "./api.js";

export interface CorpusState {
  classes: ClassView[];
  pending: ClassEdit[];
  selected: string | null;
  report: ReportRow[];
  busy: boolean;
  error: string | null;
}

type Listener = (state: CorpusState) => void;

export class CorpusStore {
  private state: CorpusState = {
    classes: [],
    pending: [],
    selected: null,
    report: [],
    busy: false,
    error: null,
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

  get current(): CorpusState {
    return this.state;
  }

  private emit(patch: Partial<CorpusState>) {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async load(): Promise<void> {
    this.emit({ busy: true, error: null });
    try {
      const classes = await this.client.classes();
      this.emit({ classes, busy: false });
    } catch (err) {
      this.emit({ busy: false, error: describe(err) });
    }
  }

  select(id: string | null) {
    this.emit({ selected: id });
  }

  stage(edit: ClassEdit) {
    this.emit({ pending: [...this.state.pending, edit] });
  }

  discard() {
    this.emit({ pending: [] });
  }

  async commit(): Promise<void> {
    if (!this.state.pending.length || this.state.busy) return;
    this.emit({ busy: true, error: null });
    try {
      const classes = await this.client.classEdits(this.state.pending);
      this.emit({ classes, pending: [], busy: false });
    } catch (err) {
      // per-edit validation failures keep the buffer so the user can fix it
      this.emit({ busy: false, error: describe(err) });
    }
  }

  async refreshReport(): Promise<void> {
    try {
      const { rows } = await this.client.subcorpusReport();
      this.emit({ report: rows });
    } catch (err) {
      this.emit({ error: describe(err) });
    }
  }
}

export function checkPartition(classes: ClassView[]): void {
  const seen = new Set<string>();
  for (const cls of classes) {
    for (const member of cls.members) {
      if (seen.has(member.ref)) {
        throw new Error(`partition violated: ${member.ref} in two classes`);
      }
      seen.add(member.ref);
    }
    if (cls.representative !== null &&
        !cls.members.some((m) => m.ref === cls.representative)) {
      throw new Error(`representative ${cls.representative} not in class ${cls.id}`);
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  return String(err);
}
