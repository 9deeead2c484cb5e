import type { ReportPayload } from "./types.js";

export type MetricKey = "acc" | "dp" | "md" | "f_mean" | "f_shift" | "f_acc";

export interface MetricSpec {
  key: MetricKey;
  label: string;
  /** Which direction is better, shown next to the metric name. */
  preferred: string;
}

// Display order matches the report table: standard metrics first, then
// the residual indicators.
export const METRICS: readonly MetricSpec[] = [
  { key: "acc", label: "Acc", preferred: "higher ↑" },
  { key: "dp", label: "DP", preferred: "closer to 1" },
  { key: "md", label: "MD", preferred: "closer to 0" },
  { key: "f_mean", label: "F_mean", preferred: "higher ↑" },
  { key: "f_shift", label: "F_shift", preferred: "smaller ↓" },
  { key: "f_acc", label: "F_acc", preferred: "smaller ↓" },
];

/** Three-decimal rendering, same as the service's report table; null -> n/a. */
export function fmt(value: number | null | undefined): string {
  return value == null ? "n/a" : value.toFixed(3);
}

export function fmtCount(n: number): string {
  return n.toLocaleString("en-US");
}

export function metricValue(report: ReportPayload, key: MetricKey): number | null {
  return report[key];
}

/** Reason string for an undefined or partial value, if the payload carries one. */
export function metricNote(report: ReportPayload, key: MetricKey): string | null {
  switch (key) {
    case "dp":
      return report.dp == null ? report.dp_reason : null;
    case "f_shift":
      if (report.f_shift == null) return report.f_shift_reason;
      return report.f_shift_partial ? `partial: ${report.f_shift_reason}` : null;
    case "f_acc":
      if (report.f_acc == null) return report.f_acc_reason;
      return report.f_acc_partial ? `partial: ${report.f_acc_reason}` : null;
    default:
      return null;
  }
}
