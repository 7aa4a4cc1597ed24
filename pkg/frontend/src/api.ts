/**
 * Typed client for the audit service. Every method maps to one route;
 * non-2xx responses become ApiError with the server's detail string so
 * callers can show it inline.
 */

import type {
  DecisionResponse,
  DecisionValue,
  ExplanationPage,
  MetricsResponse,
  QueueEntry,
  ReportDoc,
  WhatIfResponse,
} from './types.js';

export class ApiError extends Error {
  status: number;
  detail: string;

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

export interface ListParams {
  page?: number;
  pageSize?: number;
  verdict?: 'fair' | 'unfair';
}

export class ApiClient {
  constructor(private base: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.base + path, init);
    } catch (e) {
      throw new ApiError(0, e instanceof Error ? e.message : 'network failure');
    }
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  report(): Promise<ReportDoc> {
    return this.request<ReportDoc>('/api/report');
  }

  listExplanations(params: ListParams = {}): Promise<ExplanationPage> {
    const q = new URLSearchParams();
    if (params.page !== undefined) q.set('page', String(params.page));
    if (params.pageSize !== undefined) q.set('page_size', String(params.pageSize));
    if (params.verdict !== undefined) q.set('verdict', params.verdict);
    const qs = q.toString();
    return this.request<ExplanationPage>(`/api/explanations${qs ? '?' + qs : ''}`);
  }

  explanation(id: number): Promise<QueueEntry> {
    return this.request<QueueEntry>(`/api/explanations/${id}`);
  }

  whatIf(row: number | Record<string, unknown>,
         edits: Record<string, unknown> = {}): Promise<WhatIfResponse> {
    return this.post<WhatIfResponse>('/api/whatif', { row, edits });
  }

  decision(id: number): Promise<DecisionResponse> {
    return this.request<DecisionResponse>(`/api/decisions/${id}`);
  }

  submitDecision(id: number, decision: DecisionValue,
                 note: string | null = null): Promise<DecisionResponse> {
    return this.post<DecisionResponse>(`/api/decisions/${id}`, { decision, note });
  }

  metrics(ledger: 'none' | 'applied'): Promise<MetricsResponse> {
    return this.request<MetricsResponse>(`/api/metrics?ledger=${ledger}`);
  }
}
