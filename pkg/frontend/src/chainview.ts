/** Pure HTML/SVG builders (no DOM access, unit-testable as strings). */

import { LinkJson, LtsDoc, TransitionEntry } from './api.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function linkHtml(link: LinkJson): string {
  const cls = link.s === 'tau' || link.t === 'tau' ? 'link solid silent' : 'link solid';
  return `<span class="${cls}"><span class="site">${escapeHtml(link.s)}</span>` +
    `<span class="slash">\\</span><span class="site">${escapeHtml(link.t)}</span></span>`;
}

/** A transition as a horizontal puzzle: runs of solid pieces separated by
 * dashed gaps where a virtual link sits. */
export function chainHtml(blocks: LinkJson[][]): string {
  const parts: string[] = [];
  blocks.forEach((block, i) => {
    if (i > 0) parts.push('<span class="link gap" title="virtual link">&nbsp;</span>');
    parts.push(...block.map(linkHtml));
  });
  return `<span class="chain">${parts.join('')}</span>`;
}

export function transitionRowHtml(entry: TransitionEntry): string {
  return (
    `<li class="transition" data-index="${entry.index}">` +
    `<button type="button" class="fire" data-index="${entry.index}">` +
    `<span class="essential">${escapeHtml(entry.essential)}</span>` +
    `${chainHtml(entry.blocks)}</button>` +
    `<span class="target">&rarr; ${escapeHtml(entry.targetPreview)}</span></li>`
  );
}

export function transitionListHtml(entries: TransitionEntry[]): string {
  if (entries.length === 0) {
    return '<p class="terminal">no transitions: the process is terminal</p>';
  }
  return `<ul class="transitions">${entries.map(transitionRowHtml).join('')}</ul>`;
}

interface NodeLayout {
  id: number;
  x: number;
  y: number;
  term: string;
}

/** Explored fragment as an SVG: columns by distance from the initial
 * state, the current state highlighted. */
export function graphSvg(doc: LtsDoc, currentTerm: string): string {
  const depth = new Map<number, number>();
  depth.set(doc.initial, 0);
  const queue = [doc.initial];
  while (queue.length > 0) {
    const node = queue.shift()!;
    for (const tr of doc.transitions) {
      if (tr.src === node && !depth.has(tr.dst)) {
        depth.set(tr.dst, depth.get(node)! + 1);
        queue.push(tr.dst);
      }
    }
  }
  const columns = new Map<number, number[]>();
  for (const state of doc.states) {
    const d = depth.get(state.id) ?? 0;
    const column = columns.get(d) ?? [];
    column.push(state.id);
    columns.set(d, column);
  }
  const layout = new Map<number, NodeLayout>();
  const stepX = 130;
  const stepY = 70;
  let width = 60;
  let height = 60;
  for (const [d, ids] of columns) {
    ids.forEach((id, row) => {
      const x = 50 + d * stepX;
      const y = 40 + row * stepY;
      width = Math.max(width, x + 70);
      height = Math.max(height, y + 50);
      layout.set(id, { id, x, y, term: doc.states[id]?.term ?? '' });
    });
  }
  const parts: string[] = [];
  parts.push(
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" ' +
      'markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#667"/></marker></defs>',
  );
  doc.transitions.forEach((tr) => {
    const a = layout.get(tr.src);
    const b = layout.get(tr.dst);
    if (!a || !b) return;
    if (tr.src === tr.dst) {
      parts.push(
        `<path class="edge" d="M ${a.x + 10} ${a.y - 14} C ${a.x + 45} ${a.y - 45}, ` +
          `${a.x - 25} ${a.y - 55}, ${a.x - 8} ${a.y - 16}" marker-end="url(#arrow)"/>`,
      );
      parts.push(
        `<text class="edge-label" x="${a.x + 12}" y="${a.y - 40}">${escapeHtml(tr.essential)}</text>`,
      );
    } else {
      parts.push(
        `<line class="edge" x1="${a.x + 16}" y1="${a.y}" x2="${b.x - 18}" y2="${b.y}" ` +
          'marker-end="url(#arrow)"/>',
      );
      const mx = (a.x + b.x) / 2;
      const my = (a.y + b.y) / 2 - 6;
      parts.push(
        `<text class="edge-label" x="${mx}" y="${my}">${escapeHtml(tr.essential)}</text>`,
      );
    }
  });
  for (const node of layout.values()) {
    const classes = ['node'];
    if (node.id === doc.initial) classes.push('initial');
    if (node.term === currentTerm) classes.push('current');
    parts.push(
      `<g class="${classes.join(' ')}" data-state="${node.id}">` +
        `<circle cx="${node.x}" cy="${node.y}" r="14"/>` +
        `<text x="${node.x}" y="${node.y + 4}">${node.id}</text>` +
        `<title>${escapeHtml(node.term)}</title></g>`,
    );
  }
  const note = doc.complete
    ? ''
    : `<text class="note" x="8" y="${height - 8}">fragment truncated by the state bound</text>`;
  return (
    `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${parts.join('')}${note}</svg>`
  );
}
