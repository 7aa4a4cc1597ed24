/**
 * Payload shapes of the audit service API, field for field.
 * Nothing here is computed client-side; these are read-only mirrors.
 */

export interface NeighborRow {
  index: number | null;
  record: Record<string, string>;
  label: number;
  distance: number;
}

export interface FeatureDiff {
  feature: string;
  protected: boolean;
  query_value: string;
  neighbor_majority_value: string;
  differs: boolean;
}

export interface FlipResult {
  original_prediction: number;
  flipped_assignments: Record<string, string>;
  flipped_prediction: number;
  changed: boolean;
}

export type Verdict = 'fair' | 'unfair' | 'inconclusive';

export interface Explanation {
  query_index: number | null;
  query_record: Record<string, string>;
  prediction: number;
  neighbors: NeighborRow[];
  feature_diffs: FeatureDiff[];
  flip: FlipResult | null;
  verdict: Verdict;
  rule_trace: string[];
}

export interface RelabelProposal {
  query_index: number;
  current_prediction: number;
  proposed_prediction: number;
  vote_tally: { positive: number; negative: number };
  source_k: number;
}

export type DecisionValue = 'pending' | 'accepted' | 'rejected';

export interface DecisionState {
  decision: DecisionValue;
  decided_at: number | string | null;
  note: string | null;
}

export interface QueueEntry {
  id: number;
  explanation: Explanation;
  proposal: RelabelProposal | null;
  decision: DecisionState;
}

export interface ExplanationPage {
  items: QueueEntry[];
  total: number;
  page: number;
  page_size: number;
  pages: number;
  verdict: string | null;
}

export interface DecisionResponse {
  id: number;
  state: DecisionState;
  history: Array<{ query_index: number; decision: string; decided_at: number; note: string | null }>;
}

export interface GroupCounts {
  group: string;
  tp: number;
  fp: number;
  tn: number;
  fn: number;
}

export interface AttributeMetrics {
  dp_diff: number;
  eq_opp_diff: number;
  eq_acc_diff: number;
  eq_odds_diff: number;
  selection_rate_diff: number;
  privileged: GroupCounts;
  unprivileged: GroupCounts;
}

export interface MetricReport {
  per_attribute: Record<string, AttributeMetrics>;
  errors: Record<string, string>;
  consistency: number | null;
  n: number;
  n_neighbors: number | null;
}

export interface MetricsResponse {
  ledger: 'none' | 'applied';
  seed: number;
  accepted_count: number;
  changed_count: number;
  metrics: MetricReport;
}

export interface WhatIfResponse {
  row: number | null;
  record: Record<string, unknown>;
  prediction: number;
  outcome: string;
  probability: number;
  original_prediction: number;
  original_outcome: string;
  original_probability: number;
  changed: boolean;
  warnings: string[];
}

/** the slice of GET /api/report the console actually reads */
export interface ReportDoc {
  dataset: {
    schema: {
      features: Array<{
        name: string;
        kind: string;
        protected?: boolean;
        privileged_value?: string | null;
      }>;
      label: { name: string; positive: string };
    };
    n_rows: number;
  };
  review: { seed: number };
  aggregate: Record<string, unknown>;
}
