/**
 * SVG builders for the two chart kinds the UI shows: cumulative
 * distribution curves and per-percentile difference curves with their
 * confidence band.  Axis labels display payload values verbatim, so
 * every number in the DOM traces back to a service response.
 */

import type { CombineRow, EmulationRow } from "./api.js";

export const SVG_NS = "http://www.w3.org/2000/svg";

export interface LinearScale {
  min: number;
  max: number;
  size: number;
}

export function project(value: number, scale: LinearScale): number {
  const span = scale.max - scale.min;
  if (span === 0) {
    return scale.size / 2;
  }
  return ((value - scale.min) / span) * scale.size;
}

function fmtPoint(x: number, y: number): string {
  return `${x.toFixed(2)},${y.toFixed(2)}`;
}

/** Step-after path (CDF convention), y flipped to screen coordinates. */
export function stepPath(
  xs: number[],
  ys: number[],
  sx: LinearScale,
  sy: LinearScale,
): string {
  if (xs.length === 0) {
    return "";
  }
  const parts: string[] = [];
  let prevY = project(ys[0], sy);
  parts.push(`M ${fmtPoint(project(xs[0], sx), sy.size - prevY)}`);
  for (let i = 1; i < xs.length; i++) {
    const px = project(xs[i], sx);
    parts.push(`L ${fmtPoint(px, sy.size - prevY)}`);
    prevY = project(ys[i], sy);
    parts.push(`L ${fmtPoint(px, sy.size - prevY)}`);
  }
  return parts.join(" ");
}

export function linePath(
  xs: number[],
  ys: number[],
  sx: LinearScale,
  sy: LinearScale,
): string {
  return xs
    .map((x, i) => {
      const cmd = i === 0 ? "M" : "L";
      return `${cmd} ${fmtPoint(project(x, sx), sy.size - project(ys[i], sy))}`;
    })
    .join(" ");
}

/** Closed polygon between a lower and an upper curve (confidence band). */
export function bandPath(
  xs: number[],
  lo: number[],
  hi: number[],
  sx: LinearScale,
  sy: LinearScale,
): string {
  const up = xs.map(
    (x, i) =>
      `${fmtPoint(project(x, sx), sy.size - project(hi[i], sy))}`,
  );
  const down = [...xs]
    .reverse()
    .map(
      (x, i) =>
        `${fmtPoint(
          project(x, sx),
          sy.size - project(lo[lo.length - 1 - i], sy),
        )}`,
    );
  return `M ${up.join(" L ")} L ${down.join(" L ")} Z`;
}

function svgElement(
  doc: Document,
  tag: string,
  attrs: Record<string, string>,
): SVGElement {
  const el = doc.createElementNS(SVG_NS, tag) as SVGElement;
  for (const [k, v] of Object.entries(attrs)) {
    el.setAttribute(k, v);
  }
  return el;
}

function axisLabel(
  doc: Document,
  x: number,
  y: number,
  text: string,
  anchor: string,
): SVGElement {
  const el = svgElement(doc, "text", {
    x: x.toFixed(2),
    y: y.toFixed(2),
    "text-anchor": anchor,
    class: "axis-label",
  });
  el.textContent = text;
  return el;
}

export interface ChartOptions {
  width: number;
  height: number;
}

const DEFAULTS: ChartOptions = { width: 560, height: 280 };

/** Observed and emulated CDF curves over the fitted percentile grid. */
export function cdfChart(
  doc: Document,
  rows: EmulationRow[],
  options: ChartOptions = DEFAULTS,
): SVGElement {
  const { width, height } = options;
  const values = rows.flatMap((r) => [r.scc_observed, r.scc_emulated]);
  const sx: LinearScale = {
    min: Math.min(...values),
    max: Math.max(...values),
    size: width,
  };
  const sy: LinearScale = { min: 0, max: 1, size: height };
  const svg = svgElement(doc, "svg", {
    viewBox: `0 0 ${width} ${height + 20}`,
    class: "chart chart-cdf",
    role: "img",
  });
  const taus = rows.map((r) => r.tau);
  const observed = svgElement(doc, "path", {
    d: stepPath(rows.map((r) => r.scc_observed), taus, sx, sy),
    class: "curve curve-observed",
    fill: "none",
  });
  const emulated = svgElement(doc, "path", {
    d: stepPath(rows.map((r) => r.scc_emulated), taus, sx, sy),
    class: "curve curve-emulated",
    fill: "none",
  });
  svg.append(observed, emulated);
  svg.append(axisLabel(doc, 0, height + 14, String(sx.min), "start"));
  svg.append(axisLabel(doc, width, height + 14, String(sx.max), "end"));
  return svg;
}

/** Difference (shift) curve with its confidence band and a zero line. */
export function differenceChart(
  doc: Document,
  rows: EmulationRow[],
  options: ChartOptions = DEFAULTS,
): SVGElement {
  const { width, height } = options;
  const values = rows.flatMap((r) => [r.ci_low, r.ci_high, 0]);
  const sx: LinearScale = { min: 0, max: 1, size: width };
  const sy: LinearScale = {
    min: Math.min(...values),
    max: Math.max(...values),
    size: height,
  };
  const svg = svgElement(doc, "svg", {
    viewBox: `0 0 ${width} ${height + 20}`,
    class: "chart chart-difference",
    role: "img",
  });
  const taus = rows.map((r) => r.tau);
  svg.append(
    svgElement(doc, "path", {
      d: bandPath(taus, rows.map((r) => r.ci_low),
        rows.map((r) => r.ci_high), sx, sy),
      class: "ci-band",
    }),
  );
  const zeroY = (sy.size - project(0, sy)).toFixed(2);
  svg.append(
    svgElement(doc, "line", {
      x1: "0",
      x2: String(width),
      y1: zeroY,
      y2: zeroY,
      class: "zero-line",
    }),
  );
  svg.append(
    svgElement(doc, "path", {
      d: linePath(taus, rows.map((r) => r.shift), sx, sy),
      class: "curve curve-shift",
      fill: "none",
    }),
  );
  return svg;
}

/** Overlaid difference curves for several sources plus the combined one. */
export function compareChart(
  doc: Document,
  sources: { label: string; rows: EmulationRow[] }[],
  combined: CombineRow[] | null,
  options: ChartOptions = DEFAULTS,
): SVGElement {
  const { width, height } = options;
  const values = sources.flatMap((s) =>
    s.rows.flatMap((r) => [r.ci_low, r.ci_high, 0]),
  );
  const sx: LinearScale = { min: 0, max: 1, size: width };
  const sy: LinearScale = {
    min: Math.min(...values),
    max: Math.max(...values),
    size: height,
  };
  const svg = svgElement(doc, "svg", {
    viewBox: `0 0 ${width} ${height + 20}`,
    class: "chart chart-compare",
    role: "img",
  });
  sources.forEach((source, i) => {
    const taus = source.rows.map((r) => r.tau);
    svg.append(sourceGroup(doc, source, i, taus, sx, sy));
  });
  if (combined) {
    svg.append(
      svgElement(doc, "path", {
        d: linePath(
          combined.map((r) => r.tau),
          combined.map((r) => r.mu_combined),
          sx,
          sy,
        ),
        class: "curve curve-combined",
        fill: "none",
      }),
    );
  }
  return svg;
}

function sourceGroup(
  doc: Document,
  source: { label: string; rows: EmulationRow[] },
  index: number,
  taus: number[],
  sx: LinearScale,
  sy: LinearScale,
): SVGElement {
  const group = svgElement(doc, "g", {
    class: `source source-${index}`,
    "data-label": source.label,
  });
  group.append(
    svgElement(doc, "path", {
      d: linePath(taus, source.rows.map((r) => r.shift), sx, sy),
      class: "curve curve-shift",
      fill: "none",
    }),
    svgElement(doc, "path", {
      d: linePath(taus, source.rows.map((r) => r.ci_low), sx, sy),
      class: "curve curve-ci dotted",
      fill: "none",
    }),
    svgElement(doc, "path", {
      d: linePath(taus, source.rows.map((r) => r.ci_high), sx, sy),
      class: "curve curve-ci dotted",
      fill: "none",
    }),
  );
  return group;
}
