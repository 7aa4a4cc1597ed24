/**
 * Console wiring: queue pane + detail pane + metrics strip over the audit
 * service API. Single-user; decision posts update the UI optimistically
 * and roll back if the service rejects them.
 */

import { ApiClient, ApiError } from './api.js';
import { el, renderExplanationView, renderMetricsStrip, renderQueueItem } from './render.js';
import type {
  DecisionValue,
  ExplanationPage,
  MetricsResponse,
  QueueEntry,
  ReportDoc,
} from './types.js';
import { WhatIfPanel } from './whatif.js';

interface Filters {
  verdict: '' | 'fair' | 'unfair';
  decision: '' | 'pending' | 'accepted' | 'rejected';
  attribute: string;
  group: '' | 'privileged' | 'unprivileged';
}

export class App {
  private report: ReportDoc | null = null;
  private page = 1;
  private pageDoc: ExplanationPage | null = null;
  private filters: Filters = { verdict: '', decision: '', attribute: '', group: '' };
  private selected: QueueEntry | null = null;
  private posting = false;

  private queuePane!: HTMLElement;
  private queueList!: HTMLElement;
  private pager!: HTMLElement;
  private detailPane!: HTMLElement;
  private stripHost!: HTMLElement;
  private whatif: WhatIfPanel;

  constructor(private api: ApiClient, private root: HTMLElement) {
    this.whatif = new WhatIfPanel(api);
  }

  async init(): Promise<void> {
    this.root.textContent = '';
    this.stripHost = el('header', 'strip-host');
    this.queuePane = el('aside', 'queue-pane');
    this.detailPane = el('main', 'detail-pane');
    const body = el('div', 'panes');
    body.appendChild(this.queuePane);
    body.appendChild(this.detailPane);
    this.root.appendChild(this.stripHost);
    this.root.appendChild(body);

    this.detailPane.appendChild(el('div', 'placeholder', 'select a flagged row'));

    this.report = await this.api.report();
    this.buildQueueChrome();
    await Promise.all([this.refreshQueue(), this.refreshMetrics()]);
  }

  private protectedFeatures(): Array<{ name: string; privileged: string }> {
    if (!this.report) return [];
    return this.report.dataset.schema.features
      .filter((f) => f.protected)
      .map((f) => ({ name: f.name, privileged: String(f.privileged_value ?? '') }));
  }

  private buildQueueChrome(): void {
    this.queuePane.textContent = '';
    const bar = el('div', 'filter-bar');

    const verdictSel = el('select', 'filter-verdict');
    for (const v of ['', 'unfair', 'fair']) {
      const opt = el('option', undefined, v === '' ? 'any verdict' : v);
      opt.value = v;
      verdictSel.appendChild(opt);
    }
    verdictSel.addEventListener('change', () => {
      this.filters.verdict = verdictSel.value as Filters['verdict'];
      this.page = 1;
      void this.refreshQueue();
    });
    bar.appendChild(verdictSel);

    const decisionSel = el('select', 'filter-decision');
    for (const v of ['', 'pending', 'accepted', 'rejected']) {
      const opt = el('option', undefined, v === '' ? 'any decision' : v);
      opt.value = v;
      decisionSel.appendChild(opt);
    }
    decisionSel.addEventListener('change', () => {
      this.filters.decision = decisionSel.value as Filters['decision'];
      this.renderQueue();
    });
    bar.appendChild(decisionSel);

    const attrSel = el('select', 'filter-attribute');
    const anyAttr = el('option', undefined, 'any attribute');
    anyAttr.value = '';
    attrSel.appendChild(anyAttr);
    for (const f of this.protectedFeatures()) {
      const opt = el('option', undefined, f.name);
      opt.value = f.name;
      attrSel.appendChild(opt);
    }
    attrSel.addEventListener('change', () => {
      this.filters.attribute = attrSel.value;
      this.renderQueue();
    });
    bar.appendChild(attrSel);

    const groupSel = el('select', 'filter-group');
    for (const v of ['', 'unprivileged', 'privileged']) {
      const opt = el('option', undefined, v === '' ? 'any group' : v);
      opt.value = v;
      groupSel.appendChild(opt);
    }
    groupSel.addEventListener('change', () => {
      this.filters.group = groupSel.value as Filters['group'];
      this.renderQueue();
    });
    bar.appendChild(groupSel);

    this.queuePane.appendChild(bar);
    this.queueList = el('div', 'queue-list');
    this.queuePane.appendChild(this.queueList);
    this.pager = el('div', 'pager');
    this.queuePane.appendChild(this.pager);
  }

  private async refreshQueue(): Promise<void> {
    const params: Parameters<ApiClient['listExplanations']>[0] = { page: this.page };
    if (this.filters.verdict) params.verdict = this.filters.verdict;
    this.pageDoc = await this.api.listExplanations(params);
    this.renderQueue();
  }

  /** Which entries pass the client-side filters (decision, attribute/group). */
  private visibleEntries(): QueueEntry[] {
    if (!this.pageDoc) return [];
    const priv = new Map(this.protectedFeatures().map((f) => [f.name, f.privileged]));
    return this.pageDoc.items.filter((entry) => {
      if (this.filters.decision && entry.decision.decision !== this.filters.decision) return false;
      const attrs = this.filters.attribute ? [this.filters.attribute] : [...priv.keys()];
      if (this.filters.group) {
        const wantPriv = this.filters.group === 'privileged';
        const match = attrs.some((a) => {
          const value = entry.explanation.query_record[a];
          return (value === priv.get(a)) === wantPriv;
        });
        if (!match) return false;
      } else if (this.filters.attribute) {
        // attribute filter alone: keep rows whose explanation touches it
        const touches = entry.explanation.feature_diffs.some(
          (d) => d.feature === this.filters.attribute && d.differs,
        );
        if (!touches) return false;
      }
      return true;
    });
  }

  private renderQueue(): void {
    this.queueList.textContent = '';
    const entries = this.visibleEntries();
    if (!entries.length) {
      this.queueList.appendChild(el('div', 'placeholder', 'no rows match'));
    }
    for (const entry of entries) {
      const item = renderQueueItem(entry);
      if (this.selected && entry.id === this.selected.id) item.classList.add('selected');
      item.addEventListener('click', () => void this.select(entry.id));
      this.queueList.appendChild(item);
    }
    this.pager.textContent = '';
    if (this.pageDoc) {
      const prev = el('button', 'pager-prev');
      prev.textContent = 'prev';
      prev.disabled = this.page <= 1;
      prev.addEventListener('click', () => { this.page -= 1; void this.refreshQueue(); });
      const next = el('button', 'pager-next');
      next.textContent = 'next';
      next.disabled = this.page >= this.pageDoc.pages;
      next.addEventListener('click', () => { this.page += 1; void this.refreshQueue(); });
      this.pager.appendChild(prev);
      this.pager.appendChild(
        el('span', 'pager-label',
           `page ${this.pageDoc.page}/${this.pageDoc.pages} · ${this.pageDoc.total} flagged`),
      );
      this.pager.appendChild(next);
    }
  }

  private async refreshMetrics(): Promise<void> {
    const [pre, applied] = await Promise.all([
      this.api.metrics('none'),
      this.api.metrics('applied'),
    ]);
    this.renderStrip(pre, applied);
  }

  private renderStrip(pre: MetricsResponse, applied: MetricsResponse): void {
    this.stripHost.textContent = '';
    this.stripHost.appendChild(el('span', 'strip-title', 'group metrics pre -> applied'));
    this.stripHost.appendChild(renderMetricsStrip(pre, applied));
  }

  async select(id: number): Promise<void> {
    this.detailPane.textContent = '';
    this.detailPane.appendChild(el('div', 'placeholder', `loading #${id}…`));
    try {
      // fresh fetch so the decision state reflects the ledger right now
      this.selected = await this.api.explanation(id);
    } catch (e) {
      this.renderDetailError(id, e);
      return;
    }
    this.renderDetail();
    this.renderQueue();
    await this.whatif.open(this.selected.id, this.selected.explanation.query_record);
  }

  private renderDetailError(id: number, e: unknown): void {
    this.detailPane.textContent = '';
    const box = el('div', 'error-state');
    box.appendChild(el('div', 'inline-error',
                       e instanceof ApiError ? e.detail : String(e)));
    const retry = el('button', 'retry');
    retry.textContent = 'retry';
    retry.addEventListener('click', () => void this.select(id));
    box.appendChild(retry);
    this.detailPane.appendChild(box);
  }

  private renderDetail(): void {
    const entry = this.selected;
    if (!entry) return;
    this.detailPane.textContent = '';

    const head = el('div', 'detail-head');
    head.appendChild(el('h2', undefined, `row #${entry.id}`));
    head.appendChild(el('span', `badge badge-${entry.decision.decision}`,
                        entry.decision.decision));
    this.detailPane.appendChild(head);

    this.detailPane.appendChild(renderExplanationView(entry.explanation));

    if (entry.proposal) {
      const p = entry.proposal;
      this.detailPane.appendChild(el(
        'div', 'proposal',
        `proposal: relabel ${p.current_prediction} -> ${p.proposed_prediction} ` +
        `(${p.vote_tally.positive} positive / ${p.vote_tally.negative} negative of k=${p.source_k})`,
      ));
    }

    const controls = el('div', 'decision-controls');
    const note = el('input', 'decision-note');
    note.placeholder = 'note (optional)';
    if (entry.decision.note) note.value = entry.decision.note;
    const accept = el('button', 'accept');
    accept.textContent = 'accept relabel';
    const reject = el('button', 'reject');
    reject.textContent = 'reject';
    accept.disabled = this.posting;
    reject.disabled = this.posting;
    accept.addEventListener('click', () => void this.decide('accepted', note.value || null));
    reject.addEventListener('click', () => void this.decide('rejected', note.value || null));
    controls.appendChild(accept);
    controls.appendChild(reject);
    controls.appendChild(note);
    const errorBox = el('div', 'inline-error');
    errorBox.hidden = true;
    controls.appendChild(errorBox);
    this.detailPane.appendChild(controls);

    this.detailPane.appendChild(this.whatif.root);
  }

  private setButtonsDisabled(disabled: boolean): void {
    for (const b of this.detailPane.querySelectorAll<HTMLButtonElement>(
      '.decision-controls button')) {
      b.disabled = disabled;
    }
  }

  async decide(decision: DecisionValue, note: string | null): Promise<void> {
    const entry = this.selected;
    if (!entry || this.posting) return;
    this.posting = true;
    this.setButtonsDisabled(true);
    const previous = entry.decision;
    // optimistic: show the new badge immediately, roll back on error
    entry.decision = { decision, decided_at: null, note };
    this.renderDetail();
    this.setButtonsDisabled(true);
    try {
      const res = await this.api.submitDecision(entry.id, decision, note);
      entry.decision = res.state;
      this.syncQueueEntry(entry);
      this.renderDetail();
      this.renderQueue();
      await this.refreshMetrics();
    } catch (e) {
      entry.decision = previous;
      this.syncQueueEntry(entry);
      this.renderDetail();
      this.renderQueue();
      const box = this.detailPane.querySelector<HTMLElement>('.decision-controls .inline-error');
      if (box) {
        box.textContent = e instanceof ApiError ? e.detail : String(e);
        box.hidden = false;
      }
    } finally {
      this.posting = false;
      this.setButtonsDisabled(false);
    }
  }

  private syncQueueEntry(entry: QueueEntry): void {
    if (!this.pageDoc) return;
    for (const item of this.pageDoc.items) {
      if (item.id === entry.id) item.decision = entry.decision;
    }
  }
}
