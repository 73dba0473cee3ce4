/**
 * URL-serializable scenario state, so any what-if view can be shared as
 * a link.  Only user choices live here; numbers shown in panels always
 * come from captured service responses.
 */

import type { EditorState } from "./editor.js";

export interface ScenarioState {
  assumption: string;
  fromLabel: string;
  toLabels: string[];
  custom: EditorState | null;
  ciLevel: number;
}

export function defaultState(): ScenarioState {
  return {
    assumption: "prtp",
    fromLabel: "",
    toLabels: [],
    custom: null,
    ciLevel: 0.95,
  };
}

export function encodeState(state: ScenarioState): string {
  return "#s=" + encodeURIComponent(JSON.stringify(state));
}

export function decodeState(hash: string): ScenarioState | null {
  if (!hash.startsWith("#s=")) {
    return null;
  }
  try {
    const parsed = JSON.parse(decodeURIComponent(hash.slice(3)));
    if (typeof parsed !== "object" || parsed === null) {
      return null;
    }
    const base = defaultState();
    return {
      assumption:
        typeof parsed.assumption === "string"
          ? parsed.assumption
          : base.assumption,
      fromLabel:
        typeof parsed.fromLabel === "string" ? parsed.fromLabel : base.fromLabel,
      toLabels: Array.isArray(parsed.toLabels)
        ? parsed.toLabels.filter((l: unknown) => typeof l === "string")
        : base.toLabels,
      custom: parsed.custom ?? null,
      ciLevel: typeof parsed.ciLevel === "number" ? parsed.ciLevel : base.ciLevel,
    };
  } catch {
    return null;
  }
}
