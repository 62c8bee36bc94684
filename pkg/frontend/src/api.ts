/** Typed client for the stepping service; the UI computes no semantics
 * of its own, every answer comes from these endpoints. */

export interface LinkJson {
  s: string;
  t: string;
}

export interface TransitionEntry {
  index: number;
  blocks: LinkJson[][];
  essential: string;
  targetPreview: string;
}

export interface SessionState {
  sessionId: string;
  stateId: number;
  term: string;
  transitions: TransitionEntry[];
}

export interface LtsStateJson {
  id: number;
  term: string;
}

export interface LtsTransitionJson {
  src: number;
  dst: number;
  blocks: LinkJson[][];
  essential: string;
}

export interface LtsDoc {
  version: string;
  complete: boolean;
  initial: number;
  states: LtsStateJson[];
  transitions: LtsTransitionJson[];
}

export interface ErrorDoc {
  error: { code: string; message: string };
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseJson(response: Response): Promise<unknown> {
  const text = await response.text();
  try {
    return JSON.parse(text);
  } catch {
    throw new ApiError(response.status, 'BadResponse', text.slice(0, 200));
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, init);
  const doc = await parseJson(response);
  if (!response.ok) {
    const err = doc as ErrorDoc;
    throw new ApiError(
      response.status,
      err.error?.code ?? 'Unknown',
      err.error?.message ?? response.statusText,
    );
  }
  return doc as T;
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  loadProgram(source: string, main?: string): Promise<SessionState> {
    return request<SessionState>(this.base, '/api/program', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(main ? { source, main } : { source }),
    });
  }

  transitions(sessionId: string): Promise<TransitionEntry[]> {
    return request<TransitionEntry[]>(this.base, `/api/session/${sessionId}/transitions`);
  }

  step(sessionId: string, index: number): Promise<SessionState> {
    return request<SessionState>(this.base, `/api/session/${sessionId}/step`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ index }),
    });
  }

  undo(sessionId: string): Promise<SessionState> {
    return request<SessionState>(this.base, `/api/session/${sessionId}/undo`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({}),
    });
  }

  lts(sessionId: string, maxStates = 200): Promise<LtsDoc> {
    return request<LtsDoc>(
      this.base,
      `/api/session/${sessionId}/lts?max_states=${maxStates}`,
    );
  }
}
