// Sorted-residual curve scene: per-group polylines, median rulers, twin
// knee markers, segmentation bands, and an emphasized zero line.  Axes
// are fixed to x in [0,1] (normalized rank) and y in [-1,1] (residual),
// so every chart shares the same frame and side-by-side panels line up
// without any synchronization code.
//
// Everything drawn comes straight from a /api/v1/curve payload; nothing
// is recomputed here.

import { el, svg } from "./dom.js";
import { fmt, fmtCount } from "./format.js";
import type { CurvePayload, KneeSide } from "./types.js";

export interface ChartOptions {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  /** Stroke per group; the default pair is color-blind safe. */
  groupColors: [string, string];
  /** Dash pattern per group so curves stay apart in grayscale. */
  groupDashes: [string, string];
  showLegend: boolean;
}

export const DEFAULT_OPTIONS: ChartOptions = {
  width: 720,
  height: 380,
  margin: { top: 16, right: 86, bottom: 34, left: 46 },
  groupColors: ["#0072b2", "#d55e00"],
  groupDashes: ["", "7 4"],
  showLegend: true,
};

const GLOBAL_COLOR = "#3a3a44";

const SCOPE_LABELS: Record<string, string> = {
  global: "all",
  group0: "group 0",
  group1: "group 1",
};

export function xPixel(rank: number, opts: ChartOptions): number {
  const { margin, width } = opts;
  return margin.left + rank * (width - margin.left - margin.right);
}

export function yPixel(residual: number, opts: ChartOptions): number {
  const { margin, height } = opts;
  return margin.top + ((1 - residual) / 2) * (height - margin.top - margin.bottom);
}

/**
 * Render one curve payload into a self-contained view element.
 *
 * A payload that does not match the expected schema yields a diagnostic
 * panel describing the mismatch instead of a broken or empty chart.
 */
export function renderCurveView(
  payload: CurvePayload,
  options: Partial<ChartOptions> = {},
): HTMLElement {
  const opts = { ...DEFAULT_OPTIONS, ...options };
  try {
    checkShape(payload);
    return buildScene(payload, opts);
  } catch (err) {
    return diagnosticPanel(err, payload);
  }
}

// ── Schema guard ────────────────────────────────────

function need(cond: boolean, what: string): void {
  if (!cond) throw new Error(`curve payload mismatch: ${what}`);
}

function checkShape(p: CurvePayload): void {
  need(p != null && typeof p === "object", "payload is not an object");
  need(p.points != null && typeof p.points === "object", "missing 'points'");
  for (const key of ["rank", "residual", "group"] as const) {
    need(Array.isArray(p.points[key]), `'points.${key}' is not an array`);
  }
  const n = p.points.rank.length;
  need(
    p.points.residual.length === n && p.points.group.length === n,
    "point arrays differ in length",
  );
  need(n > 0, "payload has no points");
  need(p.medians != null && typeof p.medians === "object", "missing 'medians'");
  for (const key of ["m_global", "m_group0", "m_group1"] as const) {
    need(Number.isFinite(p.medians[key]), `'medians.${key}' is not a number`);
  }
  need(p.knees != null && typeof p.knees === "object", "missing 'knees'");
  for (const scope of ["global", "group0", "group1"] as const) {
    const pair = p.knees[scope];
    need(pair != null && pair.left != null && pair.right != null, `missing 'knees.${scope}'`);
  }
  need(Array.isArray(p.segments), "'segments' is not an array");
  need(p.report != null && typeof p.report === "object", "missing 'report'");
}

function diagnosticPanel(err: unknown, payload: unknown): HTMLElement {
  const message = err instanceof Error ? err.message : String(err);
  let selection = "";
  const sel = (payload as { selection?: unknown } | null)?.selection;
  if (sel) selection = JSON.stringify(sel);
  return el(
    "div",
    { className: "diagnostic", role: "alert" },
    el("strong", {}, "cannot render this curve"),
    el("pre", {}, selection ? `${message}\nselection: ${selection}` : message),
  );
}

// ── Scene assembly ──────────────────────────────────

function buildScene(payload: CurvePayload, opts: ChartOptions): HTMLElement {
  const frame = svg("svg", {
    viewBox: `0 0 ${opts.width} ${opts.height}`,
    width: opts.width,
    height: opts.height,
    role: "img",
    "aria-label": "sorted residual curve",
  });

  frame.append(
    segmentBands(payload, opts),
    axes(opts),
    zeroLine(opts),
    curves(payload, opts),
    rulers(payload, opts),
    kneeMarkers(payload, opts),
  );

  const view = el("div", { className: "curve-view" }, frame);
  const caption = el("div", { className: "curve-caption" });
  if (payload.n_rendered < payload.n_total) {
    caption.append(
      el(
        "span",
        { className: "footnote" },
        `rendered ${fmtCount(payload.n_rendered)} of ${fmtCount(payload.n_total)} points`,
      ),
    );
  }
  const badges = kneeBadges(payload);
  if (badges.childElementCount > 0) caption.append(badges);
  if (caption.childElementCount > 0) view.append(caption);
  if (opts.showLegend) view.append(legend(opts));
  return view;
}

function axes(opts: ChartOptions): SVGElement {
  const g = svg("g", { className: "axes" });
  const x0 = xPixel(0, opts);
  const x1 = xPixel(1, opts);
  for (const value of [-1, -0.5, 0, 0.5, 1]) {
    const y = yPixel(value, opts);
    g.append(
      svg("line", {
        className: "tick",
        x1: x0, y1: round(y), x2: x1, y2: round(y),
        stroke: "#ececf1",
      }),
      svg(
        "text",
        { x: x0 - 7, y: round(y) + 4, "text-anchor": "end", "font-size": 11, fill: "#888" },
        String(value),
      ),
    );
  }
  const yBase = yPixel(-1, opts) + 16;
  for (const value of [0, 0.25, 0.5, 0.75, 1]) {
    g.append(
      svg(
        "text",
        { x: round(xPixel(value, opts)), y: yBase, "text-anchor": "middle", "font-size": 11, fill: "#888" },
        `${value * 100}%`,
      ),
    );
  }
  g.append(
    svg(
      "text",
      {
        x: round((x0 + x1) / 2),
        y: opts.height - 4,
        "text-anchor": "middle",
        "font-size": 11,
        fill: "#666",
      },
      "rank",
    ),
    svg(
      "text",
      {
        x: 12,
        y: round(yPixel(0, opts)),
        "text-anchor": "middle",
        "font-size": 11,
        fill: "#666",
        transform: `rotate(-90 12 ${round(yPixel(0, opts))})`,
      },
      "residual",
    ),
  );
  return g;
}

function zeroLine(opts: ChartOptions): SVGElement {
  const y = round(yPixel(0, opts));
  return svg("line", {
    className: "zero-line",
    x1: xPixel(0, opts), y1: y, x2: xPixel(1, opts), y2: y,
    stroke: "#9a9aa4",
    "stroke-width": 1.6,
  });
}

function segmentBands(payload: CurvePayload, opts: ChartOptions): SVGElement {
  const g = svg("g", { className: "segments" });
  const top = yPixel(1, opts);
  const bottom = yPixel(-1, opts);
  payload.segments.forEach((seg, i) => {
    const x = xPixel(seg.lo, opts);
    const band = svg("rect", {
      className: "segment-band",
      x: round(x),
      y: round(top),
      width: round(xPixel(seg.hi, opts) - x),
      height: round(bottom - top),
      fill: i % 2 ? "#8a8fa3" : "#c9cddb",
      "fill-opacity": 0.12,
      "data-lo": seg.lo,
      "data-hi": seg.hi,
      "data-gap": seg.gap == null ? "" : seg.gap,
    });
    band.append(svg("title", {}, segmentTooltip(seg)));
    g.append(band);
  });
  return g;
}

function segmentTooltip(seg: CurvePayload["segments"][number]): string {
  const span = `ranks ${pct(seg.lo)}–${pct(seg.hi)}`;
  if (seg.gap == null) {
    return `${span}: gap undefined (a group has no samples here)`;
  }
  return (
    `${span}: group 0 mean ${fmt(seg.mean_group0)}, ` +
    `group 1 mean ${fmt(seg.mean_group1)}, gap ${fmt(seg.gap)}`
  );
}

function curves(payload: CurvePayload, opts: ChartOptions): SVGElement {
  const g = svg("g", { className: "curves" });
  const { rank, residual, group } = payload.points;
  for (const tag of [0, 1] as const) {
    const coords: string[] = [];
    for (let i = 0; i < rank.length; i++) {
      if (group[i] !== tag) continue;
      coords.push(`${round(xPixel(rank[i]!, opts))},${round(yPixel(residual[i]!, opts))}`);
    }
    g.append(
      svg("polyline", {
        className: `curve curve-group${tag}`,
        points: coords.join(" "),
        fill: "none",
        stroke: opts.groupColors[tag],
        "stroke-width": 1.8,
        "stroke-dasharray": opts.groupDashes[tag] || null,
        "data-count": coords.length,
      }),
    );
  }
  return g;
}

function rulers(payload: CurvePayload, opts: ChartOptions): SVGElement {
  const g = svg("g", { className: "rulers" });
  const entries = [
    { id: "global", value: payload.medians.m_global, color: GLOBAL_COLOR, label: "m_g" },
    { id: "group0", value: payload.medians.m_group0, color: opts.groupColors[0], label: "m_0" },
    { id: "group1", value: payload.medians.m_group1, color: opts.groupColors[1], label: "m_1" },
  ];
  const labelYs = spread(entries.map((e) => yPixel(e.value, opts)), 12);
  entries.forEach((entry, i) => {
    const y = round(yPixel(entry.value, opts));
    g.append(
      svg("line", {
        className: `ruler ruler-${entry.id}`,
        x1: xPixel(0, opts), y1: y, x2: xPixel(1, opts), y2: y,
        stroke: entry.color,
        "stroke-width": 1,
        "stroke-dasharray": "2 3",
        "data-ruler": entry.id,
        "data-value": entry.value,
      }),
      svg(
        "text",
        {
          className: "ruler-label",
          x: xPixel(1, opts) + 8,
          y: round(labelYs[i]!) + 4,
          "font-size": 11,
          fill: entry.color,
        },
        `${entry.label} ${fmt(entry.value)}`,
      ),
    );
  });
  return g;
}

function kneeMarkers(payload: CurvePayload, opts: ChartOptions): SVGElement {
  const g = svg("g", { className: "knees" });
  for (const scope of ["global", "group0", "group1"] as const) {
    const color =
      scope === "global" ? GLOBAL_COLOR : opts.groupColors[scope === "group0" ? 0 : 1];
    for (const side of ["left", "right"] as const) {
      const knee = payload.knees[scope][side];
      if (!knee.detected || knee.rank == null || knee.residual == null) continue;
      const cx = xPixel(knee.rank, opts);
      const cy = yPixel(knee.residual, opts);
      const size = scope === "global" ? 7 : 5.5;
      const glyph = knee.kind === "convex" ? "diamond" : "star";
      const marker = svg("path", {
        className: "knee-marker",
        d: glyph === "diamond" ? diamondPath(cx, cy, size) : starPath(cx, cy, size),
        fill: color,
        stroke: "#fff",
        "stroke-width": 0.8,
        "data-scope": scope,
        "data-side": side,
        "data-kind": knee.kind,
        "data-glyph": glyph,
      });
      marker.append(
        svg(
          "title",
          {},
          `${SCOPE_LABELS[scope]} ${knee.kind} knee at rank ${pct(knee.rank)}, ` +
            `residual ${fmt(knee.residual)}`,
        ),
      );
      g.append(marker);
    }
  }
  return g;
}

function kneeBadges(payload: CurvePayload): HTMLElement {
  const wrap = el("div", { className: "knee-badges" });
  for (const scope of ["global", "group0", "group1"] as const) {
    for (const side of ["left", "right"] as const) {
      if (payload.knees[scope][side].detected) continue;
      wrap.append(
        el(
          "span",
          { className: "badge", "data-scope": scope, "data-side": side },
          `${SCOPE_LABELS[scope]} · ${side} knee: not detected`,
        ),
      );
    }
  }
  return wrap;
}

function legend(opts: ChartOptions): HTMLElement {
  return el(
    "div",
    { className: "legend" },
    el(
      "span",
      {},
      el("span", { className: "swatch", style: `border-color: ${opts.groupColors[0]}` }),
      "group 0",
    ),
    el(
      "span",
      {},
      el("span", { className: "swatch dashed", style: `border-color: ${opts.groupColors[1]}` }),
      "group 1",
    ),
    el("span", {}, "◆ convex knee"),
    el("span", {}, "★ concave knee"),
    el("span", {}, "dotted rulers: medians (all / group 0 / group 1)"),
  );
}

// ── Geometry helpers ────────────────────────────────

function round(v: number): number {
  return Math.round(v * 100) / 100;
}

function pct(fraction: number): string {
  return `${Math.round(fraction * 100)}%`;
}

function diamondPath(cx: number, cy: number, r: number): string {
  return (
    `M ${round(cx)} ${round(cy - r)} L ${round(cx + r)} ${round(cy)} ` +
    `L ${round(cx)} ${round(cy + r)} L ${round(cx - r)} ${round(cy)} Z`
  );
}

function starPath(cx: number, cy: number, r: number): string {
  const inner = r * 0.45;
  const steps: string[] = [];
  for (let i = 0; i < 10; i++) {
    const radius = i % 2 ? inner : r;
    const angle = -Math.PI / 2 + (i * Math.PI) / 5;
    const x = round(cx + radius * Math.cos(angle));
    const y = round(cy + radius * Math.sin(angle));
    steps.push(`${i ? "L" : "M"} ${x} ${y}`);
  }
  return `${steps.join(" ")} Z`;
}

/** Push values apart until consecutive ones differ by at least minGap. */
function spread(values: number[], minGap: number): number[] {
  const order = values
    .map((value, index) => ({ value, index }))
    .sort((a, b) => a.value - b.value);
  const out = [...values];
  let floor = -Infinity;
  for (const { value, index } of order) {
    const placed = Math.max(value, floor + minGap);
    out[index] = placed;
    floor = placed;
  }
  return out;
}
