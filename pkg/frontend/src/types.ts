// Shapes of the /api/v1 payloads, mirrored field for field.  The client
// renders these verbatim; it never derives numbers of its own.

export interface RunSummary {
  run_id: string;
  dataset: string;
  algorithm: string;
  attribute_names: string[];
  environments: string[];
  created_at: string;
}

export interface SelectionPayload {
  run_id: string;
  attribute: string;
  environment: string;
}

export interface KneeSide {
  kind: "convex" | "concave";
  detected: boolean;
  rank: number | null;
  residual: number | null;
  sensitivity_used: number | null;
}

export interface KneePair {
  left: KneeSide;
  right: KneeSide;
}

export interface SegmentPayload {
  lo: number;
  hi: number;
  mean_group0: number | null;
  mean_group1: number | null;
  gap: number | null;
}

export interface PrecomputedEntry {
  value: number | null;
  reason: string | null;
}

/** Stored per-environment standard metrics; null for the "all" selection. */
export interface PrecomputedBlock {
  acc: number;
  dp: Record<string, PrecomputedEntry>;
  md: Record<string, PrecomputedEntry>;
}

export interface ReportPayload {
  selection: SelectionPayload;
  n_total: number;
  n_group0: number;
  n_group1: number;
  acc: number;
  dp: number | null;
  dp_reason: string | null;
  md: number;
  f_mean: number;
  f_shift: number | null;
  f_shift_partial: boolean;
  f_shift_reason: string | null;
  f_acc: number | null;
  f_acc_partial: boolean;
  f_acc_reason: string | null;
  knee_status: Record<string, { left: boolean; right: boolean }>;
  threshold: number;
  precomputed?: PrecomputedBlock | null;
}

export interface CurvePayload {
  selection: SelectionPayload;
  n_total: number;
  n_rendered: number;
  points: {
    rank: number[];
    residual: number[];
    group: number[];
  };
  medians: {
    m_global: number;
    m_group0: number;
    m_group1: number;
    m_tilde0: number;
    m_tilde1: number;
  };
  knees: {
    global: KneePair;
    group0: KneePair;
    group1: KneePair;
  };
  segments: SegmentPayload[];
  report: ReportPayload;
  precomputed: PrecomputedBlock | null;
}

export interface ApiErrorBody {
  error: {
    code: string;
    message: string;
    [extra: string]: unknown;
  };
}
