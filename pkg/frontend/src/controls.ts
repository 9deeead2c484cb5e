// Selection controls driven by the run index.  Options that do not
// apply to the chosen run are disabled rather than rejected later, so
// every submittable combination resolves against the server.

import { el } from "./dom.js";
import type { RunSummary } from "./types.js";

export const ENV_ALL = "all";
export const MAX_COMPARE = 4;

export interface ViewSelection {
  run: string;
  attribute: string;
  environment: string;
  /** Runs picked for the side-by-side section (current settings apply). */
  compare: string[];
}

export class SelectionControls {
  readonly root: HTMLElement;
  private readonly runSelect: HTMLSelectElement;
  private readonly attrSelect: HTMLSelectElement;
  private readonly envSelect: HTMLSelectElement;
  private readonly checks = new Map<string, HTMLInputElement>();
  private readonly byId = new Map<string, RunSummary>();

  constructor(
    runs: RunSummary[],
    private readonly onChange: (selection: ViewSelection) => void,
  ) {
    for (const run of runs) this.byId.set(run.run_id, run);

    this.runSelect = makeSelect(
      "run-select",
      runs.map((r) => ({ value: r.run_id, label: `${r.algorithm} — ${r.run_id}` })),
    );
    const attributes = sortedUnion(runs.map((r) => r.attribute_names));
    this.attrSelect = makeSelect(
      "attribute-select",
      attributes.map((a) => ({ value: a, label: a })),
    );
    const environments = sortedUnion(runs.map((r) => r.environments));
    this.envSelect = makeSelect("env-select", [
      { value: ENV_ALL, label: "all environments" },
      ...environments.map((e) => ({ value: e, label: e })),
    ]);

    this.runSelect.addEventListener("change", () => {
      this.applyAvailability();
      this.emit();
    });
    this.attrSelect.addEventListener("change", () => this.emit());
    this.envSelect.addEventListener("change", () => this.emit());

    const comparePicker = el(
      "div",
      { className: "compare-picker" },
      el("span", { className: "hint" }, `compare (up to ${MAX_COMPARE}): `),
    );
    for (const run of runs) {
      const box = document.createElement("input");
      box.type = "checkbox";
      box.setAttribute("data-run", run.run_id);
      box.addEventListener("change", () => {
        this.capCompare();
        this.emit();
      });
      this.checks.set(run.run_id, box);
      comparePicker.append(el("label", { className: "run-check" }, box, run.algorithm));
    }

    this.root = el(
      "div",
      { className: "controls" },
      el("label", {}, "run", this.runSelect),
      el("label", {}, "attribute", this.attrSelect),
      el("label", {}, "environment", this.envSelect),
      comparePicker,
    );
    this.applyAvailability();
  }

  selection(): ViewSelection {
    return {
      run: this.runSelect.value,
      attribute: this.attrSelect.value,
      environment: this.envSelect.value,
      compare: [...this.checks.entries()]
        .filter(([, box]) => box.checked)
        .map(([runId]) => runId),
    };
  }

  /** Programmatic selection change (used by tests); fires onChange once. */
  set(partial: Partial<Pick<ViewSelection, "run" | "attribute" | "environment">>): void {
    if (partial.run != null) {
      this.runSelect.value = partial.run;
      this.applyAvailability();
    }
    if (partial.attribute != null) this.attrSelect.value = partial.attribute;
    if (partial.environment != null) this.envSelect.value = partial.environment;
    this.emit();
  }

  private emit(): void {
    this.onChange(this.selection());
  }

  /** Disable attribute/environment options the current run does not have. */
  private applyAvailability(): void {
    const run = this.byId.get(this.runSelect.value);
    if (!run) return;
    const attrs = new Set(run.attribute_names);
    syncOptions(this.attrSelect, (value) => attrs.has(value));
    const envs = new Set(run.environments);
    syncOptions(this.envSelect, (value) => value === ENV_ALL || envs.has(value));
    if (this.attrSelect.selectedOptions[0]?.disabled) {
      this.attrSelect.value = firstEnabled(this.attrSelect) ?? this.attrSelect.value;
    }
    if (this.envSelect.selectedOptions[0]?.disabled) {
      this.envSelect.value = ENV_ALL;
    }
  }

  private capCompare(): void {
    const checked = [...this.checks.values()].filter((box) => box.checked).length;
    for (const box of this.checks.values()) {
      if (!box.checked) box.disabled = checked >= MAX_COMPARE;
    }
  }
}

function makeSelect(
  className: string,
  options: { value: string; label: string }[],
): HTMLSelectElement {
  const select = document.createElement("select");
  select.className = className;
  for (const opt of options) {
    select.append(new Option(opt.label, opt.value));
  }
  return select;
}

function sortedUnion(lists: string[][]): string[] {
  return [...new Set(lists.flat())].sort();
}

function syncOptions(select: HTMLSelectElement, enabled: (value: string) => boolean): void {
  for (const option of select.options) {
    option.disabled = !enabled(option.value);
  }
}

function firstEnabled(select: HTMLSelectElement): string | null {
  for (const option of select.options) {
    if (!option.disabled) return option.value;
  }
  return null;
}
