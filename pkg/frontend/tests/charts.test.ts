import { describe, expect, it } from "vitest";

import emulateDrupp from "./fixtures/emulate_drupp.json";
import {
  bandPath,
  cdfChart,
  differenceChart,
  linePath,
  project,
  stepPath,
} from "../src/charts";

const sx = { min: 0, max: 10, size: 100 };
const sy = { min: 0, max: 1, size: 50 };

describe("scales and paths", () => {
  it("projects linearly", () => {
    expect(project(0, sx)).toBe(0);
    expect(project(10, sx)).toBe(100);
    expect(project(5, sx)).toBe(50);
  });

  it("degenerate scale maps to the midpoint", () => {
    expect(project(3, { min: 3, max: 3, size: 80 })).toBe(40);
  });

  it("builds a step path with one vertical and one horizontal segment per point", () => {
    const d = stepPath([0, 5, 10], [0.1, 0.5, 0.9], sx, sy);
    expect(d.startsWith("M ")).toBe(true);
    // 1 move + 2 points x 2 segments
    expect(d.match(/L /g)?.length).toBe(4);
  });

  it("line path visits every point", () => {
    const d = linePath([0, 5, 10], [0.1, 0.5, 0.9], sx, sy);
    expect(d.match(/[ML] /g)?.length).toBe(3);
  });

  it("band path closes the polygon", () => {
    const d = bandPath([0, 5, 10], [0.1, 0.2, 0.3], [0.5, 0.6, 0.7], sx, sy);
    expect(d.endsWith("Z")).toBe(true);
  });
});

describe("chart assembly", () => {
  const rows = emulateDrupp.results;

  it("cdf chart holds observed and emulated curves", () => {
    const svg = cdfChart(document, rows);
    expect(svg.querySelector(".curve-observed")).toBeTruthy();
    expect(svg.querySelector(".curve-emulated")).toBeTruthy();
  });

  it("cdf axis labels are verbatim payload extremes", () => {
    const svg = cdfChart(document, rows);
    const labels = Array.from(svg.querySelectorAll(".axis-label")).map(
      (el) => el.textContent,
    );
    const values = rows.flatMap((r: { scc_observed: number; scc_emulated: number }) =>
      [r.scc_observed, r.scc_emulated],
    );
    expect(labels).toContain(String(Math.min(...values)));
    expect(labels).toContain(String(Math.max(...values)));
  });

  it("difference chart carries shift curve, band, and zero line", () => {
    const svg = differenceChart(document, rows);
    expect(svg.querySelector(".curve-shift")).toBeTruthy();
    expect(svg.querySelector(".ci-band")).toBeTruthy();
    expect(svg.querySelector(".zero-line")).toBeTruthy();
  });
});
