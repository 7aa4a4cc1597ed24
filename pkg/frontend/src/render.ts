/**
 * DOM builders for the console. Everything here is presentational: the
 * functions take API payloads and return elements, never fetch and never
 * derive a number that is not already in the payload.
 */

import type {
  AttributeMetrics,
  Explanation,
  MetricsResponse,
  QueueEntry,
} from './types.js';

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function fmt(x: number | null | undefined, digits = 3): string {
  if (x === null || x === undefined || Number.isNaN(x)) return '—';
  return x.toFixed(digits);
}

function outcomeText(label: number, predicted: boolean): string {
  const word = label === 1 ? 'positive' : 'negative';
  return predicted ? `${word} (predicted)` : word;
}

/**
 * Neighbor-comparison table: K neighbor rows on top, the query row last.
 * Cells on the query row are marked where the feature differs from the
 * neighbor majority; protected features get their own marker class.
 */
export function renderExplanationView(expl: Explanation): HTMLElement {
  const root = el('div', 'explanation');

  const banner = el('div', `verdict-banner verdict-${expl.verdict}`, `verdict: ${expl.verdict}`);
  root.appendChild(banner);

  const features = Object.keys(expl.query_record);
  const diffByName = new Map(expl.feature_diffs.map((d) => [d.feature, d]));

  const scroll = el('div', 'table-scroll');
  const table = el('table', 'neighbor-table');
  const thead = el('thead');
  const headRow = el('tr');
  headRow.appendChild(el('th', 'row-label', 'row'));
  for (const f of features) {
    const th = el('th', undefined, f);
    if (diffByName.get(f)?.protected) th.classList.add('protected');
    headRow.appendChild(th);
  }
  headRow.appendChild(el('th', undefined, 'outcome'));
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = el('tbody');
  for (const nb of expl.neighbors) {
    const tr = el('tr', 'neighbor-row');
    const label = nb.index === null ? 'train' : `train#${nb.index}`;
    const td = el('td', 'row-label', label);
    td.title = `distance ${fmt(nb.distance, 4)}`;
    tr.appendChild(td);
    for (const f of features) {
      tr.appendChild(el('td', undefined, nb.record[f] ?? ''));
    }
    tr.appendChild(el('td', 'outcome', outcomeText(nb.label, false)));
    tbody.appendChild(tr);
  }

  const qr = el('tr', 'query-row');
  const qlabel = expl.query_index === null ? 'query' : `query#${expl.query_index}`;
  qr.appendChild(el('td', 'row-label', qlabel));
  for (const f of features) {
    const td = el('td', undefined, expl.query_record[f] ?? '');
    const diff = diffByName.get(f);
    if (diff?.differs) {
      td.classList.add('diff');
      if (diff.protected) td.classList.add('protected');
      td.title = `neighbor majority: ${diff.neighbor_majority_value}`;
    }
    qr.appendChild(td);
  }
  qr.appendChild(el('td', 'outcome', outcomeText(expl.prediction, true)));
  tbody.appendChild(qr);
  table.appendChild(tbody);
  scroll.appendChild(table);
  root.appendChild(scroll);

  if (expl.flip) {
    const parts = Object.entries(expl.flip.flipped_assignments)
      .map(([k, v]) => `${k} -> ${v}`)
      .join(', ');
    const note = expl.flip.changed
      ? `prediction ${expl.flip.original_prediction} -> ${expl.flip.flipped_prediction} (changed)`
      : `prediction unchanged (${expl.flip.original_prediction})`;
    root.appendChild(el('div', 'flip-result', `flip [${parts}]: ${note}`));
  }

  if (expl.rule_trace.length) {
    const ul = el('ul', 'rule-trace');
    for (const line of expl.rule_trace) ul.appendChild(el('li', undefined, line));
    root.appendChild(ul);
  }
  return root;
}

export function renderQueueItem(entry: QueueEntry): HTMLElement {
  const item = el('div', 'queue-item');
  item.dataset.id = String(entry.id);
  const head = el('div', 'queue-item-head');
  head.appendChild(el('span', 'queue-id', `#${entry.id}`));
  head.appendChild(el('span', `badge badge-${entry.decision.decision}`, entry.decision.decision));
  item.appendChild(head);

  const protectedDiffs = entry.explanation.feature_diffs
    .filter((d) => d.differs && d.protected)
    .map((d) => d.feature);
  const bits = [`verdict ${entry.explanation.verdict}`];
  if (protectedDiffs.length) bits.push(`differs: ${protectedDiffs.join(', ')}`);
  if (entry.explanation.flip?.changed) bits.push('flip changes prediction');
  item.appendChild(el('div', 'queue-item-sub', bits.join(' · ')));
  return item;
}

function metricCell(name: string, pre: number, post: number): HTMLElement {
  const cell = el('span', 'metric-cell');
  cell.appendChild(el('span', 'metric-name', name));
  cell.appendChild(el('span', 'metric-pre', fmt(pre)));
  cell.appendChild(el('span', 'metric-arrow', '->'));
  const postSpan = el('span', 'metric-post', fmt(post));
  if (fmt(post) !== fmt(pre)) postSpan.classList.add('metric-moved');
  cell.appendChild(postSpan);
  return cell;
}

/**
 * Pre/post strip. `pre` is the stored report metrics (ledger=none) and
 * `applied` the recomputation with accepted relabels (ledger=applied);
 * both arrive straight from the service.
 */
export function renderMetricsStrip(pre: MetricsResponse, applied: MetricsResponse): HTMLElement {
  const strip = el('div', 'metrics-strip');
  const attrs = Object.keys(pre.metrics.per_attribute);
  for (const attr of attrs) {
    const a: AttributeMetrics = pre.metrics.per_attribute[attr];
    const b: AttributeMetrics | undefined = applied.metrics.per_attribute[attr];
    if (!b) continue;
    const group = el('span', 'metric-group');
    group.appendChild(el('span', 'metric-attr', attr));
    group.appendChild(metricCell('dp', a.dp_diff, b.dp_diff));
    group.appendChild(metricCell('eq_opp', a.eq_opp_diff, b.eq_opp_diff));
    group.appendChild(metricCell('eq_odds', a.eq_odds_diff, b.eq_odds_diff));
    strip.appendChild(group);
  }
  const cons = el('span', 'metric-group');
  cons.appendChild(el('span', 'metric-attr', 'consistency'));
  cons.appendChild(metricCell('', pre.metrics.consistency ?? NaN, applied.metrics.consistency ?? NaN));
  strip.appendChild(cons);
  strip.appendChild(
    el('span', 'metric-counts',
       `${applied.accepted_count} accepted / ${applied.changed_count} changed`),
  );
  return strip;
}
