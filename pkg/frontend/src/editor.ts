/**
 * Distribution editor model: per-bin masses with live renormalization.
 *
 * The editor never emits an unnormalized distribution: dragging one bin
 * rescales the others proportionally so the sum stays 1, and submission
 * of an all-zero distribution is blocked.
 */

import type { DistributionPayload } from "./api.js";

/** Coarse default grid for the pure rate of time preference (percent). */
export const DEFAULT_PRTP_SUPPORT = [0, 0.5, 1, 1.5, 2, 3];

export interface EditorState {
  assumption: string;
  support: number[];
  mass: number[];
  label: string;
}

export function fromPreset(preset: DistributionPayload): EditorState {
  return {
    assumption: preset.assumption,
    support: [...preset.support],
    mass: [...preset.probability],
    label: preset.label,
  };
}

export function blankEditor(
  assumption: string,
  support: number[],
): EditorState {
  return {
    assumption,
    support: [...support],
    mass: support.map(() => 1 / support.length),
    label: "custom",
  };
}

/**
 * Set bin `index` to `value` (clamped to [0, 1]) and rescale the other
 * bins proportionally so the total stays 1.  When the other bins hold no
 * mass, the remainder is spread over them equally.
 */
export function setBinMass(
  mass: number[],
  index: number,
  value: number,
): number[] {
  const v = Math.min(1, Math.max(0, value));
  const out = [...mass];
  const othersTotal = mass.reduce(
    (acc, m, i) => (i === index ? acc : acc + m),
    0,
  );
  const remainder = 1 - v;
  for (let i = 0; i < out.length; i++) {
    if (i === index) {
      out[i] = v;
    } else if (othersTotal > 0) {
      out[i] = (mass[i] / othersTotal) * remainder;
    } else {
      out[i] = out.length > 1 ? remainder / (out.length - 1) : 0;
    }
  }
  return normalized(out);
}

/** Exact renormalization; all-zero input comes back unchanged. */
export function normalized(mass: number[]): number[] {
  const total = mass.reduce((a, b) => a + b, 0);
  if (total <= 0) {
    return [...mass];
  }
  return mass.map((m) => m / total);
}

export function totalMass(mass: number[]): number {
  return mass.reduce((a, b) => a + b, 0);
}

export function isEmpty(mass: number[]): boolean {
  return mass.every((m) => m === 0);
}

/** Distribution payload for the service; empty editors are blocked. */
export function toDistribution(state: EditorState): DistributionPayload {
  if (isEmpty(state.mass)) {
    throw new Error("distribution is empty; assign mass to at least one bin");
  }
  return {
    assumption: state.assumption,
    support: [...state.support],
    probability: normalized(state.mass),
    label: state.label,
  };
}
