// Shared test scaffolding: fixture loading and a scripted data source.
//
// The JSON fixtures are verbatim response bodies captured from a live
// service instance (see fixtures/regen.py), so every number asserted
// against the DOM is a number the real server produced.

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { ApiError, type DataSource } from "../src/api.js";
import type { CurvePayload, ReportPayload, RunSummary } from "../src/types.js";

// import.meta.url is an http URL under the browser-like test environment,
// so fixtures are addressed from the package root instead.
export function fixture<T>(name: string): T {
  const path = join(process.cwd(), "test", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export const loadRuns = (): RunSummary[] => fixture("runs.json");
export const loadCurve = (run: string): CurvePayload => fixture(`curve-${run}.json`);
export const loadReport = (run: string): ReportPayload => fixture(`report-${run}.json`);

export interface ErrorFixture {
  status: number;
  body: { error: { code: string; message: string; [extra: string]: unknown } };
}

export const loadError = (name: string): ErrorFixture => fixture(`${name}.json`);

export function apiErrorFrom(captured: ErrorFixture): ApiError {
  const { code, message, ...details } = captured.body.error;
  return new ApiError(captured.status, code, message, details);
}

const keyOf = (run: string, attribute: string, environment: string): string =>
  `${run}/${attribute}/${environment}`;

/**
 * DataSource fed from fixtures.  Individual selections can be put on
 * hold and released later to exercise out-of-order responses.
 */
export class FakeData implements DataSource {
  readonly log: string[] = [];
  private readonly holds = new Map<string, Promise<void>>();
  private readonly releases = new Map<string, () => void>();

  constructor(
    readonly runsList: RunSummary[],
    readonly curves: Map<string, CurvePayload | ApiError>,
  ) {}

  /** The three reference runs plus the skewed run with its night 422. */
  static standard(): FakeData {
    const curves = new Map<string, CurvePayload | ApiError>();
    for (const run of ["iga", "irm", "mbdg", "skewed"]) {
      curves.set(keyOf(run, "gender", "all"), loadCurve(run));
    }
    curves.set(keyOf("skewed", "gender", "night"), apiErrorFrom(loadError("err-missing-group")));
    return new FakeData(loadRuns(), curves);
  }

  hold(run: string, attribute: string, environment: string): void {
    const key = keyOf(run, attribute, environment);
    this.holds.set(key, new Promise((resolve) => this.releases.set(key, resolve)));
  }

  release(run: string, attribute: string, environment: string): void {
    const key = keyOf(run, attribute, environment);
    this.releases.get(key)?.();
    this.holds.delete(key);
  }

  async runs(): Promise<RunSummary[]> {
    this.log.push("runs");
    return structuredClone(this.runsList);
  }

  async curve(run: string, attribute: string, environment: string): Promise<CurvePayload> {
    const key = keyOf(run, attribute, environment);
    this.log.push(`curve ${key}`);
    const gate = this.holds.get(key);
    if (gate) await gate;
    const entry = this.curves.get(key);
    if (entry === undefined) throw new ApiError(404, "unknown_run", `no fixture for ${key}`);
    if (entry instanceof ApiError) throw entry;
    return structuredClone(entry);
  }

  async report(run: string, attribute: string, environment: string): Promise<ReportPayload> {
    // the views read the report embedded in the curve payload
    const payload = await this.curve(run, attribute, environment);
    return payload.report;
  }
}
