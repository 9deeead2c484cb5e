// Indicator panel and the compare-mode summary table.  Both display
// report payload values verbatim (formatted to three decimals); reasons
// for undefined or partial values ride along as notes.

import { el } from "./dom.js";
import { fmt, fmtCount, METRICS, metricNote, metricValue } from "./format.js";
import type { ReportPayload } from "./types.js";

export function renderIndicatorPanel(report: ReportPayload): HTMLElement {
  const wrap = el("div", { className: "indicator-block" });
  wrap.append(
    el(
      "p",
      { className: "panel-context" },
      `n = ${fmtCount(report.n_total)} (group 0: ${fmtCount(report.n_group0)}, ` +
        `group 1: ${fmtCount(report.n_group1)}) · threshold ${report.threshold}`,
    ),
  );
  const grid = el("div", { className: "indicator-panel" });
  for (const metric of METRICS) {
    const value = metricValue(report, metric.key);
    const note = metricNote(report, metric.key);
    const tile = el(
      "div",
      { className: value == null ? "metric undefined" : "metric", "data-metric": metric.key },
      el(
        "div",
        { className: "name" },
        el("span", {}, metric.label),
        el("span", { className: "preferred" }, metric.preferred),
      ),
      el("div", { className: "value" }, fmt(value)),
    );
    if (note) tile.append(el("div", { className: "note" }, note));
    grid.append(tile);
  }
  wrap.append(grid);
  return wrap;
}

export interface CompareRow {
  label: string;
  report: ReportPayload | null;
  /** Shown across the metric columns when the fetch for this row failed. */
  error?: string;
}

export function renderCompareTable(rows: CompareRow[]): HTMLElement {
  const head = el(
    "tr",
    {},
    el("th", {}, "Algorithm"),
    ...METRICS.map((metric) => el("th", {}, metric.label)),
  );
  const body = rows.map((row) => {
    const tr = el("tr", { "data-row": row.label });
    tr.append(el("td", {}, row.label));
    if (row.report == null) {
      tr.append(
        el("td", { className: "error-cell", colspan: METRICS.length }, row.error ?? "unavailable"),
      );
    } else {
      for (const metric of METRICS) {
        tr.append(
          el("td", { "data-metric": metric.key }, fmt(metricValue(row.report, metric.key))),
        );
      }
    }
    return tr;
  });
  return el(
    "table",
    { className: "compare-table" },
    el("thead", {}, head),
    el("tbody", {}, ...body),
  );
}
