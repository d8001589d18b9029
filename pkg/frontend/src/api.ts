// Typed client for the workbench HTTP API. All state lives server-side;
// this module only shapes requests and responses.

export interface ApiEvent {
  kind: string; // OUTPUT INPUT ACTION CALL RETURN END
  text: string;
  node: string;
  step: number;
  detail: string;
}

export interface SessionOpened {
  id: string;
  status: string;
  events: ApiEvent[];
}

export interface InputResult {
  status: string;
  events: ApiEvent[];
}

export interface SessionState {
  id: string;
  root: string;
  status: string;
  current_diagram: string;
  current_node: string;
  bindings: Record<string, string>;
  step_count: number;
  transcript: ApiEvent[];
}

export interface TableDump {
  fields: string[];
  records: (string | number)[][];
}

export interface ModelDocument {
  revision: {
    number: number;
    author: string;
    timestamp: number;
    message: string;
    source_name: string;
  };
  digest: string;
  tables: Record<string, TableDump>;
}

export interface ApiError {
  code: string;
  message: string;
}

export class WorkbenchError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class WorkbenchApi {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const body = await res.json();
    if (!res.ok) {
      const err = body as ApiError;
      throw new WorkbenchError(err.code ?? "HTTP_ERROR", err.message ?? res.statusText, res.status);
    }
    return body as T;
  }

  getModel(rev?: number): Promise<ModelDocument> {
    const query = rev === undefined ? "" : `?rev=${rev}`;
    return this.request(`/api/model${query}`);
  }

  startSession(root: string, rev?: number): Promise<SessionOpened> {
    const body: Record<string, unknown> = { root };
    if (rev !== undefined) body.rev = rev;
    return this.request("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  sendInput(sessionId: string, line: string): Promise<InputResult> {
    return this.request(`/api/sessions/${sessionId}/input`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ line }),
    });
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request(`/api/sessions/${sessionId}`);
  }

  eventStreamUrl(fromSeq = 1): string {
    return `${this.baseUrl}/api/events?from=${fromSeq}`;
  }
}
