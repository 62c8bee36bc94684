import { ApiClient } from './api.js';
import { ExplorerStore } from './state.js';
import { Elements, bind } from './ui.js';

const EXAMPLES = [
  'blind_routing.cna',
  'ack_routing.cna',
  'composite_routing.cna',
  'dynamic_1_1.cna',
  'three_party.cna',
  'forwarders.cna',
  'rt.cna',
  'ccs_counter.cna',
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(): ExplorerStore {
  const store = new ExplorerStore(new ApiClient(''));
  const els: Elements = {
    term: el('term'),
    transitions: el('transitions'),
    history: el('history'),
    graph: el('graph'),
    error: el('error'),
    undo: el<HTMLButtonElement>('undo'),
  };
  bind(store, els);

  const source = el<HTMLTextAreaElement>('source');
  const examples = el<HTMLSelectElement>('examples');
  for (const name of EXAMPLES) {
    const option = document.createElement('option');
    option.value = name;
    option.textContent = name;
    examples.appendChild(option);
  }
  examples.addEventListener('change', () => {
    if (!examples.value) return;
    // the service serves the repository root; the UI lives under /frontend/
    fetch(`../corpus/${examples.value}`)
      .then((r) => (r.ok ? r.text() : Promise.reject(new Error(`missing ${examples.value}`))))
      .then((text) => {
        source.value = text;
      })
      .catch((err) => {
        els.error.textContent = String(err);
        els.error.hidden = false;
      });
  });
  el<HTMLButtonElement>('load').addEventListener('click', () => {
    const main = el<HTMLInputElement>('entry').value.trim();
    void store.load(source.value, main || undefined).then(() => store.refreshGraph());
  });
  return store;
}

if (typeof document !== 'undefined' && document.getElementById('term')) {
  boot();
}
