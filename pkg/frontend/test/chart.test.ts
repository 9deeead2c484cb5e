import { describe, expect, it } from "vitest";

import { DEFAULT_OPTIONS, renderCurveView, xPixel, yPixel } from "../src/chart.js";
import { fmt } from "../src/format.js";
import type { CurvePayload } from "../src/types.js";
import { loadCurve } from "./helpers.js";

const round2 = (v: number): number => Math.round(v * 100) / 100;

function render(payload: CurvePayload): HTMLElement {
  return renderCurveView(payload);
}

describe("scales", () => {
  it("map the fixed domains onto the plot area", () => {
    expect(xPixel(0, DEFAULT_OPTIONS)).toBeLessThan(xPixel(1, DEFAULT_OPTIONS));
    expect(yPixel(1, DEFAULT_OPTIONS)).toBeLessThan(yPixel(-1, DEFAULT_OPTIONS));
    expect(yPixel(0, DEFAULT_OPTIONS)).toBeCloseTo(
      (yPixel(1, DEFAULT_OPTIONS) + yPixel(-1, DEFAULT_OPTIONS)) / 2,
      10,
    );
  });
});

describe("group curves", () => {
  const payload = loadCurve("iga");
  const view = render(payload);

  it("draws one polyline per group with every point placed", () => {
    const p0 = view.querySelector("polyline.curve-group0")!;
    const p1 = view.querySelector("polyline.curve-group1")!;
    expect(p0).not.toBeNull();
    expect(p1).not.toBeNull();
    const n0 = payload.points.group.filter((g) => g === 0).length;
    const n1 = payload.points.group.filter((g) => g === 1).length;
    expect(Number(p0.getAttribute("data-count"))).toBe(n0);
    expect(Number(p1.getAttribute("data-count"))).toBe(n1);
    expect(n0 + n1).toBe(payload.points.rank.length);
  });

  it("keeps the groups apart in grayscale via dash patterns", () => {
    const p0 = view.querySelector("polyline.curve-group0")!;
    const p1 = view.querySelector("polyline.curve-group1")!;
    expect(p0.getAttribute("stroke")).not.toBe(p1.getAttribute("stroke"));
    expect(p0.getAttribute("stroke-dasharray")).toBeNull();
    expect(p1.getAttribute("stroke-dasharray")).toBe("7 4");
  });

  it("emphasizes the zero line at y = 0", () => {
    const zero = view.querySelector(".zero-line")!;
    expect(zero).not.toBeNull();
    expect(Number(zero.getAttribute("y1"))).toBe(round2(yPixel(0, DEFAULT_OPTIONS)));
  });
});

describe("median rulers", () => {
  const payload = loadCurve("irm");
  const view = render(payload);

  it("places one ruler per median carrying the payload value", () => {
    const expected: Record<string, number> = {
      global: payload.medians.m_global,
      group0: payload.medians.m_group0,
      group1: payload.medians.m_group1,
    };
    const rulers = [...view.querySelectorAll("[data-ruler]")];
    expect(rulers).toHaveLength(3);
    for (const ruler of rulers) {
      const id = ruler.getAttribute("data-ruler")!;
      expect(Number(ruler.getAttribute("data-value"))).toBe(expected[id]);
      expect(Number(ruler.getAttribute("y1"))).toBe(
        round2(yPixel(expected[id]!, DEFAULT_OPTIONS)),
      );
    }
  });

  it("labels each ruler with its formatted value", () => {
    const labels = [...view.querySelectorAll("text.ruler-label")].map((t) => t.textContent);
    expect(labels).toContain(`m_g ${fmt(payload.medians.m_global)}`);
    expect(labels).toContain(`m_0 ${fmt(payload.medians.m_group0)}`);
    expect(labels).toContain(`m_1 ${fmt(payload.medians.m_group1)}`);
  });
});

describe("knee markers", () => {
  const payload = loadCurve("iga");

  it("draws a marker for every detected knee", () => {
    const view = render(payload);
    const markers = [...view.querySelectorAll(".knee-marker")];
    const detected = (["global", "group0", "group1"] as const).flatMap((scope) =>
      (["left", "right"] as const).filter((side) => payload.knees[scope][side].detected),
    );
    expect(markers).toHaveLength(detected.length);
    expect(markers.length).toBe(6);
  });

  it("maps convex knees to diamonds and concave knees to stars", () => {
    const view = render(payload);
    for (const marker of view.querySelectorAll(".knee-marker")) {
      const scope = marker.getAttribute("data-scope") as "global" | "group0" | "group1";
      const side = marker.getAttribute("data-side") as "left" | "right";
      const knee = payload.knees[scope][side];
      expect(marker.getAttribute("data-kind")).toBe(knee.kind);
      expect(marker.getAttribute("data-glyph")).toBe(
        knee.kind === "convex" ? "diamond" : "star",
      );
    }
  });

  it("places markers at the knee's rank position", () => {
    const view = render(payload);
    const marker = view.querySelector('.knee-marker[data-scope="global"][data-side="left"]')!;
    const knee = payload.knees.global.left;
    const d = marker.getAttribute("d")!;
    const firstX = Number(d.split(" ")[1]);
    expect(firstX).toBeCloseTo(xPixel(knee.rank!, DEFAULT_OPTIONS), 0);
  });

  it("shows a badge instead of a marker for an undetected knee", () => {
    const broken = structuredClone(payload);
    broken.knees.group1.right = {
      kind: "concave",
      detected: false,
      rank: null,
      residual: null,
      sensitivity_used: null,
    };
    const view = render(broken);
    expect(view.querySelectorAll(".knee-marker")).toHaveLength(5);
    expect(
      view.querySelector('.knee-marker[data-scope="group1"][data-side="right"]'),
    ).toBeNull();
    const badge = view.querySelector('.badge[data-scope="group1"][data-side="right"]')!;
    expect(badge.textContent).toBe("group 1 · right knee: not detected");
  });

  it("renders no badges when every knee is detected", () => {
    const view = render(payload);
    expect(view.querySelectorAll(".badge")).toHaveLength(0);
  });
});

describe("segmentation bands", () => {
  const payload = loadCurve("mbdg");

  it("shades one band per segment spanning its rank window", () => {
    const view = render(payload);
    const bands = [...view.querySelectorAll(".segment-band")];
    expect(bands).toHaveLength(payload.segments.length);
    bands.forEach((band, i) => {
      expect(Number(band.getAttribute("data-lo"))).toBe(payload.segments[i]!.lo);
      expect(Number(band.getAttribute("data-hi"))).toBe(payload.segments[i]!.hi);
    });
  });

  it("describes the per-segment gap in a tooltip", () => {
    const view = render(payload);
    const first = payload.segments[0]!;
    const title = view.querySelector(".segment-band title")!;
    expect(title.textContent).toContain(`gap ${fmt(first.gap)}`);
    expect(title.textContent).toContain("group 0 mean");
  });

  it("says so when a segment's gap is undefined", () => {
    const broken = structuredClone(payload);
    broken.segments[0] = { ...broken.segments[0]!, mean_group1: null, gap: null };
    const view = render(broken);
    const title = view.querySelector(".segment-band title")!;
    expect(title.textContent).toContain("gap undefined");
  });
});

describe("down-sampling footnote", () => {
  it("shows rendered-of-total when the payload was thinned", () => {
    const thinned = structuredClone(loadCurve("iga"));
    thinned.n_total = 12000;
    const view = render(thinned);
    expect(view.querySelector(".footnote")!.textContent).toBe(
      "rendered 400 of 12,000 points",
    );
  });

  it("stays silent when every point is present", () => {
    const view = render(loadCurve("iga"));
    expect(view.querySelector(".footnote")).toBeNull();
  });
});

describe("schema guard", () => {
  it("renders a diagnostic panel for a malformed payload, never a blank view", () => {
    const broken = structuredClone(loadCurve("iga")) as Record<string, unknown>;
    delete (broken.points as Record<string, unknown>).residual;
    const view = renderCurveView(broken as unknown as CurvePayload);
    expect(view.classList.contains("diagnostic")).toBe(true);
    expect(view.textContent).toContain("points.residual");
    expect(view.textContent!.length).toBeGreaterThan(0);
  });

  it("copes with a payload that is not an object", () => {
    const view = renderCurveView(null as unknown as CurvePayload);
    expect(view.classList.contains("diagnostic")).toBe(true);
  });

  it("rejects point arrays of differing length", () => {
    const broken = structuredClone(loadCurve("iga"));
    broken.points.rank = broken.points.rank.slice(0, 10);
    const view = render(broken);
    expect(view.classList.contains("diagnostic")).toBe(true);
    expect(view.textContent).toContain("length");
  });
});

describe("shared frame", () => {
  it("uses the same viewBox for every payload, keeping panels comparable", () => {
    const a = render(loadCurve("iga")).querySelector("svg")!;
    const b = render(loadCurve("irm")).querySelector("svg")!;
    expect(a.getAttribute("viewBox")).toBe(b.getAttribute("viewBox"));
  });
});
