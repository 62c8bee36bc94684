/** DOM wiring: render the view state into the page and translate user
 * gestures into store actions. */

import { ExplorerStore, ViewState } from './state.js';
import { escapeHtml, graphSvg, transitionListHtml } from './chainview.js';

export interface Elements {
  term: HTMLElement;
  transitions: HTMLElement;
  history: HTMLElement;
  graph: HTMLElement;
  error: HTMLElement;
  undo: HTMLButtonElement;
}

export function renderState(view: ViewState, els: Elements): void {
  els.term.textContent = view.sessionId ? view.currentTerm : 'no program loaded';
  els.transitions.innerHTML = view.sessionId ? transitionListHtml(view.transitions) : '';
  els.history.innerHTML = view.history
    .map((h) => `<li><code>${escapeHtml(h.label)}</code></li>`)
    .join('');
  els.undo.disabled = view.history.length === 0 || view.busy;
  els.error.textContent = view.error ?? '';
  els.error.hidden = view.error === null;
  if (view.graph) {
    els.graph.innerHTML = graphSvg(view.graph, view.currentTerm);
  } else {
    els.graph.innerHTML = '';
  }
}

export function bind(store: ExplorerStore, els: Elements): void {
  store.subscribe((view) => renderState(view, els));
  els.transitions.addEventListener('click', (event) => {
    const target = event.target as HTMLElement | null;
    const button = target?.closest('button.fire') as HTMLElement | null;
    if (button?.dataset.index !== undefined) {
      void store.step(Number(button.dataset.index)).then(() => store.refreshGraph());
    }
  });
  els.undo.addEventListener('click', () => {
    void store.undo().then(() => store.refreshGraph());
  });
}
