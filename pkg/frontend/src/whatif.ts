/**
 * What-if panel: an editable copy of the query record. Every prediction
 * shown here comes from POST /api/whatif; the panel never evaluates the
 * model itself. Edited fields are marked against the original record.
 */

import { ApiClient, ApiError } from './api.js';
import { el, fmt } from './render.js';
import type { WhatIfResponse } from './types.js';

export class WhatIfPanel {
  readonly root: HTMLElement;
  private row: number | null = null;
  private original: Record<string, string> = {};
  private inputs = new Map<string, HTMLInputElement>();
  private result: HTMLElement;
  private error: HTMLElement;
  private fields: HTMLElement;
  private button: HTMLButtonElement;

  constructor(private api: ApiClient) {
    this.root = el('div', 'whatif');
    this.root.appendChild(el('h3', undefined, 'what if'));
    this.fields = el('div', 'whatif-fields');
    this.root.appendChild(this.fields);
    this.button = el('button', 'whatif-run');
    this.button.textContent = 're-predict';
    this.button.disabled = true;
    this.button.addEventListener('click', () => void this.repredict());
    this.root.appendChild(this.button);
    this.result = el('div', 'whatif-result');
    this.root.appendChild(this.result);
    this.error = el('div', 'inline-error');
    this.error.hidden = true;
    this.root.appendChild(this.error);
  }

  /** Load a query row and fetch the baseline prediction (no edits). */
  async open(row: number | null, record: Record<string, string>): Promise<void> {
    this.row = row;
    this.original = { ...record };
    this.inputs.clear();
    this.fields.textContent = '';
    this.result.textContent = '';
    this.error.hidden = true;
    for (const [name, value] of Object.entries(record)) {
      const wrap = el('label', 'whatif-field');
      wrap.appendChild(el('span', undefined, name));
      const input = el('input');
      input.value = value;
      input.name = name;
      input.addEventListener('input', () => {
        wrap.classList.toggle('edited', input.value !== this.original[name]);
      });
      wrap.appendChild(input);
      this.inputs.set(name, input);
      this.fields.appendChild(wrap);
    }
    this.button.disabled = false;
    await this.repredict();
  }

  private edits(): Record<string, string> {
    const out: Record<string, string> = {};
    for (const [name, input] of this.inputs) {
      if (input.value !== this.original[name]) out[name] = input.value;
    }
    return out;
  }

  private async repredict(): Promise<void> {
    if (this.row === null && !this.inputs.size) return;
    this.button.disabled = true;
    this.error.hidden = true;
    try {
      const body = this.row === null ? { ...this.original, ...this.edits() } : this.row;
      const res = await this.api.whatIf(body, this.row === null ? {} : this.edits());
      this.show(res);
    } catch (e) {
      this.error.textContent = e instanceof ApiError ? e.detail : String(e);
      this.error.hidden = false;
    } finally {
      this.button.disabled = false;
    }
  }

  private show(res: WhatIfResponse): void {
    this.result.textContent = '';
    const line = el('div', `whatif-pred outcome-${res.outcome}`);
    line.textContent = `prediction: ${res.outcome} (p=${fmt(res.probability)})`;
    this.result.appendChild(line);
    const base = el('div', 'whatif-baseline');
    base.textContent =
      `original: ${res.original_outcome} (p=${fmt(res.original_probability)})` +
      (res.changed ? ' — changed' : '');
    this.result.appendChild(base);
    for (const w of res.warnings) {
      this.result.appendChild(el('div', 'whatif-warning', w));
    }
  }
}
