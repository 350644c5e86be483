// Typed client for the workbench service. The UI never computes remaining
// sets or propagation itself; every number it renders came over this wire.

export interface SessionView {
  id: string;
  text: string;
  status: string;
  remaining: number;
  analyses: number;
  judged: number;
  approved: number[] | null;
}

export interface DiscriminantRow {
  key: string;
  kind: string;
  label: string;
  span: number;
  holds: number;
  verdict: "correct" | "incorrect" | null;
  source: "user" | "propagated" | null;
}

export interface JudgeResponse {
  remaining: number;
  status: string;
  propagated: string[];
  version: number;
}

export interface ClassMember {
  ref: string;
  text: string;
  tags: string[];
}

export interface ClassView {
  id: string;
  tag_sequence: string[];
  provenance: string;
  representative: string | null;
  members: ClassMember[];
}

export interface ReportRow {
  size: number;
  representative: string;
  class_tags: string[];
}

export type ClassEdit =
  | { op: "move"; member: string; from: string; to: string }
  | { op: "split"; class: string; members: string[] }
  | { op: "merge"; classes: string[]; into: string }
  | { op: "designate"; class: string; member: string };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "error";
  let message = response.statusText;
  let detail: unknown = null;
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
    detail = body.detail ?? null;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, message, detail);
}

export class Client {
  constructor(readonly base: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, { method: "POST", body: JSON.stringify(body) });
  }

  health(): Promise<{ status: string; grammar: string }> {
    return this.request("/health");
  }

  sentences(status?: string): Promise<SessionView[]> {
    const q = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request<{ sentences: SessionView[] }>(`/sentences${q}`).then(
      (r) => r.sentences,
    );
  }

  discriminants(id: string): Promise<{ sentence: SessionView; discriminants: DiscriminantRow[] }> {
    return this.request(`/sentences/${encodeURIComponent(id)}/discriminants`);
  }

  judge(
    id: string,
    key: string,
    verdict: "correct" | "incorrect",
    version?: number,
    requestId?: string,
  ): Promise<JudgeResponse> {
    return this.post(`/sentences/${encodeURIComponent(id)}/judgments`, {
      discriminant: key,
      verdict,
      version,
      request_id: requestId,
    });
  }

  undo(id: string): Promise<{ remaining: number; status: string; version: number }> {
    return this.post(`/sentences/${encodeURIComponent(id)}/undo`, {});
  }

  resolve(id: string, mode: "unique-required" | "accept-set"): Promise<{ approved: number[]; status: string }> {
    return this.post(`/sentences/${encodeURIComponent(id)}/resolve`, { mode });
  }

  classes(): Promise<ClassView[]> {
    return this.request<{ classes: ClassView[] }>("/classes").then((r) => r.classes);
  }

  classEdits(edits: ClassEdit[]): Promise<ClassView[]> {
    return this.post<{ classes: ClassView[] }>("/classes/edits", { edits }).then(
      (r) => r.classes,
    );
  }

  subcorpusReport(): Promise<{ rows: ReportRow[]; total_segments: number }> {
    return this.request("/subcorpus/report");
  }
}
