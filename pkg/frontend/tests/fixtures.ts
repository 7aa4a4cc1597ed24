/**
 * Canned service payloads for component tests. The census fixture mirrors
 * the worked example shipped with the audit service: a rejected query row
 * (Black, Female) whose five nearest accepted neighbors are White and,
 * four of five, Male.
 */

import type {
  Explanation,
  ExplanationPage,
  MetricsResponse,
  QueueEntry,
  ReportDoc,
  WhatIfResponse,
} from '../src/types.js';

const COLUMNS = [
  'age', 'workclass', 'marital-status', 'occupation', 'relationship',
  'race', 'sex', 'capital-gain', 'capital-loss', 'hours-per-week',
];

function record(values: Array<string | number>): Record<string, string> {
  const out: Record<string, string> = {};
  COLUMNS.forEach((c, i) => { out[c] = String(values[i]); });
  return out;
}

export const censusExplanation: Explanation = {
  query_index: 1746,
  query_record: record([42, 'Private', 'Divorced', 'Adm-clerical', 'Not-in-family',
                        'Black', 'Female', 0, 0, 38]),
  prediction: 0,
  neighbors: [
    { index: 1011, label: 1, distance: 0.9273,
      record: record([59, 'Self-emp-not-inc', 'Married-civ-spouse', 'Sales', 'Husband',
                      'White', 'Male', 0, 0, 40]) },
    { index: 2490, label: 1, distance: 0.9410,
      record: record([31, 'Private', 'Married-civ-spouse', 'Sales', 'Husband',
                      'White', 'Male', 0, 0, 40]) },
    { index: 307, label: 1, distance: 0.9652,
      record: record([45, 'Self-emp-not-inc', 'Married-civ-spouse', 'Prof-specialty', 'Husband',
                      'White', 'Male', 0, 0, 40]) },
    { index: 3318, label: 1, distance: 1.0087,
      record: record([63, 'Private', 'Separated', 'Prof-specialty', 'Not-in-family',
                      'White', 'Female', 0, 0, 40]) },
    { index: 4502, label: 1, distance: 1.0214,
      record: record([17, 'Private', 'Never-married', 'Prof-specialty', 'Own-child',
                      'White', 'Male', 0, 0, 40]) },
  ],
  feature_diffs: [
    { feature: 'age', protected: false, query_value: '[38.0, 51.0)',
      neighbor_majority_value: '[17.0, 38.0)', differs: false },
    { feature: 'workclass', protected: false, query_value: 'Private',
      neighbor_majority_value: 'Private', differs: false },
    { feature: 'marital-status', protected: false, query_value: 'Divorced',
      neighbor_majority_value: 'Married-civ-spouse', differs: true },
    { feature: 'occupation', protected: false, query_value: 'Adm-clerical',
      neighbor_majority_value: 'Prof-specialty', differs: true },
    { feature: 'relationship', protected: false, query_value: 'Not-in-family',
      neighbor_majority_value: 'Husband', differs: true },
    { feature: 'race', protected: true, query_value: 'Black',
      neighbor_majority_value: 'White', differs: true },
    { feature: 'sex', protected: true, query_value: 'Female',
      neighbor_majority_value: 'Male', differs: true },
    { feature: 'capital-gain', protected: false, query_value: '[0.0, 114.0)',
      neighbor_majority_value: '[0.0, 114.0)', differs: false },
    { feature: 'capital-loss', protected: false, query_value: '[0.0, 155.0)',
      neighbor_majority_value: '[0.0, 155.0)', differs: false },
    { feature: 'hours-per-week', protected: false, query_value: '[35.0, 45.0)',
      neighbor_majority_value: '[35.0, 45.0)', differs: false },
  ],
  flip: {
    original_prediction: 0,
    flipped_assignments: { race: 'White', sex: 'Male' },
    flipped_prediction: 1,
    changed: true,
  },
  verdict: 'unfair',
  rule_trace: [
    "neighbor-diff: protected features ['race', 'sex'] differ from the neighbor majority; "
      + '3 unprotected differences (allowed 3)',
    'flip: reassigning [race=White, sex=Male] changed prediction 0 -> 1',
  ],
};

export const censusEntry: QueueEntry = {
  id: 1746,
  explanation: censusExplanation,
  proposal: {
    query_index: 1746,
    current_prediction: 0,
    proposed_prediction: 1,
    vote_tally: { positive: 5, negative: 0 },
    source_k: 5,
  },
  decision: { decision: 'pending', decided_at: null, note: null },
};

/** query agrees with every neighbor majority; nothing to mark */
export const fairExplanation: Explanation = {
  query_index: 880,
  query_record: record([36, 'Private', 'Married-civ-spouse', 'Sales', 'Husband',
                        'White', 'Male', 0, 0, 40]),
  prediction: 0,
  neighbors: [
    { index: 12, label: 1, distance: 0.41,
      record: record([39, 'Private', 'Married-civ-spouse', 'Sales', 'Husband',
                      'White', 'Male', 0, 0, 40]) },
    { index: 77, label: 1, distance: 0.52,
      record: record([33, 'Private', 'Married-civ-spouse', 'Sales', 'Husband',
                      'White', 'Male', 0, 0, 40]) },
  ],
  feature_diffs: COLUMNS.map((c) => ({
    feature: c,
    protected: c === 'race' || c === 'sex',
    query_value: 'x',
    neighbor_majority_value: 'x',
    differs: false,
  })),
  flip: {
    original_prediction: 0,
    flipped_assignments: { race: 'White', sex: 'Male' },
    flipped_prediction: 0,
    changed: false,
  },
  verdict: 'fair',
  rule_trace: [],
};

export const fairEntry: QueueEntry = {
  id: 880,
  explanation: fairExplanation,
  proposal: null,
  decision: { decision: 'accepted', decided_at: 1724000000, note: 'looked at it' },
};

/** 20 features so the comparison table is wider than any pane */
export function wideExplanation(): Explanation {
  const names = Array.from({ length: 20 }, (_, i) => `f${String(i + 1).padStart(2, '0')}`);
  const rec = (tag: string) => Object.fromEntries(names.map((n) => [n, `${tag}-${n}`]));
  return {
    query_index: 5,
    query_record: rec('q'),
    prediction: 0,
    neighbors: [0, 1, 2].map((i) => ({
      index: i, label: 1, distance: 0.1 * (i + 1), record: rec(`n${i}`),
    })),
    feature_diffs: names.map((n, i) => ({
      feature: n,
      protected: i === 0,
      query_value: `q-${n}`,
      neighbor_majority_value: `n0-${n}`,
      differs: i < 2,
    })),
    flip: null,
    verdict: 'inconclusive',
    rule_trace: [],
  };
}

export const queuePage: ExplanationPage = {
  items: [censusEntry, fairEntry],
  total: 2,
  page: 1,
  page_size: 20,
  pages: 1,
  verdict: null,
};

const groupCounts = (group: string, tp: number, fp: number, tn: number, fn: number) =>
  ({ group, tp, fp, tn, fn });

export const metricsPre: MetricsResponse = {
  ledger: 'none',
  seed: 0,
  accepted_count: 0,
  changed_count: 0,
  metrics: {
    per_attribute: {
      race: {
        dp_diff: 0.104, eq_opp_diff: 0.061, eq_acc_diff: 0.022,
        eq_odds_diff: 0.061, selection_rate_diff: 0.104,
        privileged: groupCounts('White', 900, 120, 2400, 310),
        unprivileged: groupCounts('Black', 40, 6, 380, 44),
      },
      sex: {
        dp_diff: 0.178, eq_opp_diff: 0.092, eq_acc_diff: 0.031,
        eq_odds_diff: 0.092, selection_rate_diff: 0.178,
        privileged: groupCounts('Male', 800, 100, 1700, 280),
        unprivileged: groupCounts('Female', 90, 12, 1300, 62),
      },
    },
    errors: {},
    consistency: 0.981,
    n: 4523,
    n_neighbors: 5,
  },
};

/** what /api/metrics?ledger=applied returns once one relabel is accepted */
export const metricsApplied: MetricsResponse = {
  ledger: 'applied',
  seed: 0,
  accepted_count: 1,
  changed_count: 1,
  metrics: {
    ...metricsPre.metrics,
    per_attribute: {
      race: { ...metricsPre.metrics.per_attribute.race, dp_diff: 0.097, selection_rate_diff: 0.097 },
      sex: { ...metricsPre.metrics.per_attribute.sex, dp_diff: 0.171, selection_rate_diff: 0.171 },
    },
  },
};

export const reportDoc: ReportDoc = {
  dataset: {
    schema: {
      features: [
        { name: 'age', kind: 'numeric' },
        { name: 'workclass', kind: 'categorical' },
        { name: 'marital-status', kind: 'categorical' },
        { name: 'occupation', kind: 'categorical' },
        { name: 'relationship', kind: 'categorical' },
        { name: 'race', kind: 'categorical', protected: true, privileged_value: 'White' },
        { name: 'sex', kind: 'categorical', protected: true, privileged_value: 'Male' },
        { name: 'capital-gain', kind: 'numeric' },
        { name: 'capital-loss', kind: 'numeric' },
        { name: 'hours-per-week', kind: 'numeric' },
      ],
      label: { name: 'income', positive: '>50K' },
    },
    n_rows: 45222,
  },
  review: { seed: 0 },
  aggregate: {},
};

export const whatIfBaseline: WhatIfResponse = {
  row: 1746,
  record: censusExplanation.query_record,
  prediction: 0,
  outcome: 'negative',
  probability: 0.231,
  original_prediction: 0,
  original_outcome: 'negative',
  original_probability: 0.231,
  changed: false,
  warnings: [],
};
