// Application wiring: one main view (chart + indicator panel) driven by
// the selection controls, plus an optional side-by-side section.  Each
// view keeps a single in-flight fetch; responses for superseded
// selections are discarded, so the screen always matches the latest
// choice no matter how quickly the user toggles.

import { ApiError, type DataSource } from "./api.js";
import { renderCurveView, type ChartOptions } from "./chart.js";
import { SelectionControls, type ViewSelection } from "./controls.js";
import { clear, el } from "./dom.js";
import { renderCompareTable, renderIndicatorPanel, type CompareRow } from "./panel.js";
import type { RunSummary } from "./types.js";

const PANEL_CHART: Partial<ChartOptions> = {
  width: 340,
  height: 220,
  margin: { top: 10, right: 56, bottom: 26, left: 36 },
  showLegend: false,
};

export class App {
  private controls: SelectionControls | null = null;
  private readonly chartHost = el("div", { className: "chart-host" });
  private readonly panelHost = el("div", { className: "panel-host" });
  private readonly compareHost = el("div", { className: "compare-host" });
  private readonly byId = new Map<string, RunSummary>();
  private epoch = 0;
  private compareEpoch = 0;
  private pending: Promise<void>[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly data: DataSource,
  ) {}

  async init(): Promise<void> {
    clear(this.root);
    let runs: RunSummary[];
    try {
      runs = await this.data.runs();
    } catch (err) {
      this.root.append(inlineError(err));
      return;
    }
    if (runs.length === 0) {
      this.root.append(
        el("p", { className: "muted" }, "no runs registered yet — upload predictions first"),
      );
      return;
    }
    for (const run of runs) this.byId.set(run.run_id, run);
    this.controls = new SelectionControls(runs, (selection) => this.selectionChanged(selection));
    this.root.append(this.controls.root, this.chartHost, this.panelHost, this.compareHost);
    await this.refresh(this.controls.selection());
  }

  /** Settles once every change kicked off so far has been applied or discarded. */
  async idle(): Promise<void> {
    while (this.pending.length > 0) {
      await Promise.allSettled(this.pending.splice(0));
    }
  }

  private selectionChanged(selection: ViewSelection): void {
    this.pending.push(this.refresh(selection), this.refreshCompare(selection));
  }

  private async refresh(selection: ViewSelection): Promise<void> {
    const ticket = ++this.epoch;
    this.chartHost.setAttribute("aria-busy", "true");
    try {
      const payload = await this.data.curve(
        selection.run,
        selection.attribute,
        selection.environment,
      );
      if (ticket !== this.epoch) return;
      clear(this.chartHost);
      this.chartHost.append(renderCurveView(payload));
      clear(this.panelHost);
      this.panelHost.append(renderIndicatorPanel(payload.report));
    } catch (err) {
      if (ticket !== this.epoch) return;
      clear(this.chartHost);
      this.chartHost.append(inlineError(err));
      clear(this.panelHost);
    } finally {
      if (ticket === this.epoch) this.chartHost.removeAttribute("aria-busy");
    }
  }

  private async refreshCompare(selection: ViewSelection): Promise<void> {
    const ticket = ++this.compareEpoch;
    if (selection.compare.length < 2) {
      if (ticket === this.compareEpoch) clear(this.compareHost);
      return;
    }
    const settled = await Promise.allSettled(
      selection.compare.map((run) =>
        this.data.curve(run, selection.attribute, selection.environment),
      ),
    );
    if (ticket !== this.compareEpoch) return;

    const panels = el("div", { className: "compare-panels" });
    const rows: CompareRow[] = [];
    settled.forEach((result, i) => {
      const runId = selection.compare[i]!;
      const label = this.byId.get(runId)?.algorithm ?? runId;
      const panel = el(
        "div",
        { className: "compare-panel", "data-run": runId },
        el("h3", {}, label),
      );
      if (result.status === "fulfilled") {
        panel.append(renderCurveView(result.value, PANEL_CHART));
        rows.push({ label, report: result.value.report });
      } else {
        panel.append(inlineError(result.reason));
        rows.push({ label, report: null, error: errorText(result.reason) });
      }
      panels.append(panel);
    });

    clear(this.compareHost);
    this.compareHost.append(
      el(
        "section",
        { className: "compare-section" },
        el("h2", {}, "side by side"),
        el(
          "p",
          { className: "small muted" },
          `attribute ${selection.attribute} · environment ${selection.environment}`,
        ),
        panels,
        renderCompareTable(rows),
      ),
    );
  }
}

function errorText(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

/** Inline error notice showing the server's code and reason, never a blank pane. */
export function inlineError(err: unknown): HTMLElement {
  if (err instanceof ApiError) {
    const stage = typeof err.details.stage === "string" ? ` (stage: ${err.details.stage})` : "";
    return el(
      "div",
      { className: "error-inline", role: "alert" },
      el("code", {}, err.code),
      ` ${err.message}${stage}`,
    );
  }
  return el(
    "div",
    { className: "error-inline", role: "alert" },
    err instanceof Error ? err.message : String(err),
  );
}
