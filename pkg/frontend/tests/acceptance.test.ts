/**
 * Secondary acceptance criteria, run against golden payloads captured
 * from the real service (scripts/make_golden.py in the repository root):
 *
 *  - zero case: literature presets on both sides render an identically
 *    zero difference curve;
 *  - traceability: every number displayed in a panel appears verbatim in
 *    the captured service response for that panel (three scenarios).
 */

import { describe, expect, it } from "vitest";

import combineFixture from "./fixtures/combine_drupp_nesje.json";
import emulateDrupp from "./fixtures/emulate_drupp.json";
import emulateNesje from "./fixtures/emulate_nesje.json";
import emulateZero from "./fixtures/emulate_zero.json";
import errorMismatch from "./fixtures/error_mismatch.json";
import { ApiError, CombineResponse, EmulateResponse } from "../src/api";
import {
  capturedPayload,
  renderCompare,
  renderError,
  renderResults,
} from "../src/panels";

function panel(): HTMLElement {
  const el = document.createElement("div");
  document.body.append(el);
  return el;
}

/** Every maximal numeric token, per text node (cells never concatenate). */
function numericTokens(root: HTMLElement): string[] {
  const walker = root.ownerDocument.createTreeWalker(root, 4 /* TEXT */);
  const tokens: string[] = [];
  while (walker.nextNode()) {
    const text = walker.currentNode.nodeValue ?? "";
    for (const m of text.matchAll(/-?\d+(?:\.\d+)?(?:e[+-]?\d+)?/gi)) {
      tokens.push(m[0]);
    }
  }
  return tokens;
}

describe("zero case", () => {
  it("renders an identically-zero difference curve for F = P", () => {
    const payload = emulateZero as EmulateResponse;
    expect(payload.results.length).toBeGreaterThan(0);
    for (const row of payload.results) {
      expect(row.shift).toBe(0);
      expect(row.se).toBe(0);
      expect(row.ci_low).toBe(0);
      expect(row.ci_high).toBe(0);
    }
    const container = panel();
    renderResults(container, payload);
    // the shift curve must coincide with the zero line: same constant y
    const svg = container.querySelector(".chart-difference")!;
    const zeroY = Number(svg.querySelector(".zero-line")!.getAttribute("y1"));
    const d = svg.querySelector(".curve-shift")!.getAttribute("d")!;
    const ys = Array.from(d.matchAll(/[ML] [-\d.]+,([-\d.]+)/g)).map((m) =>
      Number(m[1]),
    );
    expect(ys.length).toBeGreaterThan(0);
    for (const y of ys) {
      expect(y).toBeCloseTo(zeroY, 6);
    }
  });
});

describe("traceability: DOM numbers vs captured payload", () => {
  function assertTraceable(container: HTMLElement): void {
    const payload = capturedPayload(container);
    expect(payload).toBeDefined();
    const haystack = JSON.stringify(payload);
    const tokens = numericTokens(container);
    expect(tokens.length).toBeGreaterThan(0);
    for (const token of tokens) {
      expect(haystack, `token ${token} missing from payload`).toContain(
        token.replace(/^-/, ""),
      );
    }
  }

  it("scenario 1: zero-case results panel", () => {
    const container = panel();
    renderResults(container, emulateZero as EmulateResponse);
    assertTraceable(container);
  });

  it("scenario 2: single-alteration results panel", () => {
    const container = panel();
    renderResults(container, emulateDrupp as EmulateResponse);
    assertTraceable(container);
  });

  it("scenario 3: compare panel with combined curve", () => {
    const container = panel();
    renderCompare(
      container,
      [
        { label: "Drupp", payload: emulateDrupp as EmulateResponse },
        { label: "Nesje", payload: emulateNesje as EmulateResponse },
      ],
      combineFixture as CombineResponse,
    );
    assertTraceable(container);
  });
});

describe("compare-sources properties", () => {
  it("combined curve lies inside the envelope when inputs agree in sign", () => {
    const a = (emulateDrupp as EmulateResponse).results;
    const b = (emulateNesje as EmulateResponse).results;
    const combined = (combineFixture as CombineResponse).results;
    for (let i = 0; i < combined.length; i++) {
      if (Math.sign(a[i].shift) === Math.sign(b[i].shift)) {
        const lo = Math.min(a[i].shift, b[i].shift);
        const hi = Math.max(a[i].shift, b[i].shift);
        expect(combined[i].mu_combined).toBeGreaterThanOrEqual(lo - 1e-12);
        expect(combined[i].mu_combined).toBeLessThanOrEqual(hi + 1e-12);
      }
      const narrowest = Math.min(a[i].se, b[i].se);
      expect(combined[i].sigma_combined).toBeLessThanOrEqual(
        narrowest + 1e-12,
      );
    }
  });

  it("a single source renders without a combined curve (combine == input)", () => {
    const container = panel();
    renderCompare(
      container,
      [{ label: "Drupp", payload: emulateDrupp as EmulateResponse }],
      null,
    );
    expect(container.querySelector(".curve-combined")).toBeNull();
    expect(container.querySelectorAll(".source").length).toBe(1);
  });
});

describe("error handling", () => {
  it("shows the service message verbatim and drops stale content", () => {
    const container = panel();
    renderResults(container, emulateDrupp as EmulateResponse);
    expect(container.querySelector(".summary-table")).toBeTruthy();
    renderError(container, new ApiError(400, errorMismatch));
    expect(container.querySelector(".summary-table")).toBeNull();
    const banner = container.querySelector(".error-banner")!;
    expect(banner.textContent).toContain("400");
    expect(banner.textContent).toContain("support mismatch");
  });

  it("service down renders an unreachable banner, no stale data", () => {
    const container = panel();
    renderResults(container, emulateDrupp as EmulateResponse);
    renderError(container, new ApiError(0, "fetch failed"));
    expect(container.querySelector(".error-banner")!.textContent).toContain(
      "unreachable",
    );
    expect(container.querySelector(".chart-cdf")).toBeNull();
  });
});
