import { describe, expect, it } from "vitest";

import presetsFixture from "./fixtures/presets.json";
import {
  DEFAULT_PRTP_SUPPORT,
  blankEditor,
  fromPreset,
  isEmpty,
  normalized,
  setBinMass,
  toDistribution,
  totalMass,
} from "../src/editor";

const drupp = presetsFixture.presets.find((p: { label: string }) =>
  p.label.startsWith("PRTP: Drupp"),
)!;

describe("setBinMass", () => {
  it("keeps the total at one while rescaling the others proportionally", () => {
    const mass = [0.25, 0.25, 0.25, 0.25];
    const next = setBinMass(mass, 0, 0.7);
    expect(totalMass(next)).toBeCloseTo(1, 12);
    expect(next[0]).toBeCloseTo(0.7, 12);
    // the other bins keep their relative proportions (here: equal)
    expect(next[1]).toBeCloseTo(0.1, 12);
    expect(next[2]).toBeCloseTo(0.1, 12);
    expect(next[3]).toBeCloseTo(0.1, 12);
  });

  it("preserves unequal proportions among untouched bins", () => {
    const next = setBinMass([0.1, 0.6, 0.3], 0, 0.4);
    expect(next[1] / next[2]).toBeCloseTo(2, 10);
    expect(totalMass(next)).toBeCloseTo(1, 12);
  });

  it("supports pushing all mass onto one bin (degenerate but valid)", () => {
    const next = setBinMass([0.5, 0.3, 0.2], 1, 1.0);
    expect(next).toEqual([0, 1, 0]);
  });

  it("recovers from a degenerate state by spreading the remainder", () => {
    const next = setBinMass([0, 1, 0], 1, 0.4);
    expect(totalMass(next)).toBeCloseTo(1, 12);
    expect(next[0]).toBeCloseTo(0.3, 12);
    expect(next[2]).toBeCloseTo(0.3, 12);
  });

  it("clamps the dragged value into [0, 1]", () => {
    expect(setBinMass([0.5, 0.5], 0, 1.7)[0]).toBe(1);
    expect(setBinMass([0.5, 0.5], 0, -2)[0]).toBe(0);
  });
});

describe("editor state", () => {
  it("loads a preset with bins matching the /presets payload", () => {
    const editor = fromPreset(drupp);
    expect(editor.support).toEqual(drupp.support);
    expect(editor.mass).toEqual(drupp.probability);
  });

  it("never emits an unnormalized distribution", () => {
    const editor = blankEditor("prtp", DEFAULT_PRTP_SUPPORT);
    editor.mass = setBinMass(editor.mass, 2, 0.9);
    const dist = toDistribution(editor);
    const total = dist.probability.reduce((a, b) => a + b, 0);
    expect(Math.abs(total - 1)).toBeLessThan(1e-12);
  });

  it("blocks submission of an empty distribution", () => {
    const editor = blankEditor("prtp", DEFAULT_PRTP_SUPPORT);
    editor.mass = editor.mass.map(() => 0);
    expect(isEmpty(editor.mass)).toBe(true);
    expect(() => toDistribution(editor)).toThrow(/empty/);
  });

  it("normalized() leaves all-zero input unchanged", () => {
    expect(normalized([0, 0])).toEqual([0, 0]);
  });

  it("uses the coarse default PRTP grid", () => {
    expect(DEFAULT_PRTP_SUPPORT).toEqual([0, 0.5, 1, 1.5, 2, 3]);
  });
});
