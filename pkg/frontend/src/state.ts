/** Explorer view state and its actions.
 *
 * The state mirrors the service session after every request; stepping on
 * a stale transition list (409) refreshes instead of crashing.  Actions
 * are queued so at most one request per session is in flight.
 */

import { ApiClient, ApiError, LtsDoc, TransitionEntry } from './api.js';

export interface HistoryEntry {
  term: string;
  label: string;
}

export interface ViewState {
  sessionId: string | null;
  stateId: number;
  currentTerm: string;
  transitions: TransitionEntry[];
  history: HistoryEntry[];
  graph: LtsDoc | null;
  error: string | null;
  busy: boolean;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    stateId: 0,
    currentTerm: '',
    transitions: [],
    history: [],
    graph: null,
    error: null,
    busy: false,
  };
}

export type Listener = (state: ViewState) => void;

export class ExplorerStore {
  private state: ViewState = initialViewState();
  private queue: Promise<void> = Promise.resolve();
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  get view(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Serialize actions: a new action starts only after the previous one
   * settled, keeping a single in-flight request per session. */
  private enqueue(action: () => Promise<void>): Promise<void> {
    const run = async () => {
      this.emit({ busy: true, error: null });
      try {
        await action();
      } catch (err) {
        this.emit({ error: err instanceof Error ? err.message : String(err) });
      } finally {
        this.emit({ busy: false });
      }
    };
    this.queue = this.queue.then(run);
    return this.queue;
  }

  load(source: string, main?: string): Promise<void> {
    return this.enqueue(async () => {
      const session = await this.api.loadProgram(source, main);
      this.emit({
        sessionId: session.sessionId,
        stateId: session.stateId,
        currentTerm: session.term,
        transitions: session.transitions,
        history: [],
        graph: null,
      });
    });
  }

  step(index: number): Promise<void> {
    return this.enqueue(async () => {
      if (this.state.sessionId === null) return;
      const sid = this.state.sessionId;
      const chosen = this.state.transitions.find((t) => t.index === index);
      try {
        const session = await this.api.step(sid, index);
        this.emit({
          stateId: session.stateId,
          currentTerm: session.term,
          transitions: session.transitions,
          history: [
            ...this.state.history,
            { term: this.state.currentTerm, label: chosen?.essential ?? '?' },
          ],
        });
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          // stale list: resynchronize with the session
          this.emit({ transitions: await this.api.transitions(sid) });
          return;
        }
        throw err;
      }
    });
  }

  undo(): Promise<void> {
    return this.enqueue(async () => {
      if (this.state.sessionId === null) return;
      try {
        const session = await this.api.undo(this.state.sessionId);
        this.emit({
          stateId: session.stateId,
          currentTerm: session.term,
          transitions: session.transitions,
          history: this.state.history.slice(0, -1),
        });
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) return; // nothing to undo
        throw err;
      }
    });
  }

  refreshGraph(maxStates = 200): Promise<void> {
    return this.enqueue(async () => {
      if (this.state.sessionId === null) return;
      this.emit({ graph: await this.api.lts(this.state.sessionId, maxStates) });
    });
  }

  /** Resolves when every queued action has settled (test helper). */
  idle(): Promise<void> {
    return this.queue;
  }
}
