/** Typed client for the session HTTP API.
 *
 * The server is authoritative: this module only moves JSON, it never
 * computes candidates, counters or highlights on its own.
 */

export interface Candidate {
  components: string[];
  lines: number[];
}

export interface Action {
  kind: string;
  action_id: string;
  payload: Record<string, unknown>;
}

export interface Counters {
  setup: number;
  query: number;
  loop: number;
  exprs: number;
  iter: number;
  Total: number;
  Total2: number;
  status: string;
  [key: string]: unknown;
}

export interface Localized {
  lines: number[];
  reason: string;
  [key: string]: unknown;
}

export interface SessionView {
  id: string;
  status: string;
  source: string;
  source_lines: string[];
  candidates: Candidate[];
  highlight_lines: number[];
  action: Action | null;
  counters: Counters;
  history: Array<[Record<string, unknown>, unknown]>;
  localized: Localized | null;
}

export interface TestSpec {
  method: string;
  args: unknown[];
  expect: Record<string, unknown>;
  expect_return?: unknown;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

async function parse<T>(resp: { status: number; json(): Promise<unknown> }): Promise<T> {
  if (resp.status === 204) {
    return undefined as T;
  }
  const body = (await resp.json()) as Record<string, unknown> & T;
  if (resp.status >= 400) {
    const message = typeof body?.error === "string" ? body.error : `HTTP ${resp.status}`;
    throw new ApiError(resp.status, message);
  }
  return body;
}

export class Client {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private call<T>(method: string, path: string, body?: unknown): Promise<T> {
    return this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((resp) => parse<T>(resp));
  }

  createSession(program: string, test: TestSpec, name?: string): Promise<SessionView> {
    const body: Record<string, unknown> = { program, test };
    if (name !== undefined) {
      body.name = name;
    }
    return this.call("POST", "/sessions", body);
  }

  getSession(id: string): Promise<SessionView> {
    return this.call("GET", `/sessions/${id}`);
  }

  answer(id: string, actionId: string, verdict: string | number): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/answer`, {
      action_id: actionId,
      verdict,
    });
  }

  expand(id: string, component: string): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/expand`, { component });
  }

  report(id: string): Promise<Counters> {
    return this.call("GET", `/sessions/${id}/report`);
  }

  deleteSession(id: string): Promise<void> {
    return this.call("DELETE", `/sessions/${id}`);
  }
}
