/**
 * Application wiring: presets into selectors, editor interaction, one
 * in-flight emulation per panel with latest-wins cancellation, and
 * URL-serialized scenario state.
 */

import { ApiClient, ApiError, DistributionPayload } from "./api.js";
import {
  EditorState,
  blankEditor,
  fromPreset,
  isEmpty,
  setBinMass,
  toDistribution,
} from "./editor.js";
import { renderCompare, renderError, renderResults, verbatim } from "./panels.js";
import { decodeState, defaultState, encodeState, ScenarioState } from "./state.js";

interface App {
  client: ApiClient;
  presets: DistributionPayload[];
  state: ScenarioState;
  editor: EditorState | null;
  requestToken: number;
}

function presetsFor(app: App, assumption: string): DistributionPayload[] {
  return app.presets.filter((p) => p.assumption === assumption);
}

function byLabel(app: App, label: string): DistributionPayload | undefined {
  return app.presets.find((p) => p.label === label);
}

function option(doc: Document, label: string): HTMLOptionElement {
  const el = doc.createElement("option");
  el.value = label;
  el.textContent = label;
  return el;
}

export function renderEditor(
  container: HTMLElement,
  editor: EditorState,
  onChange: (next: EditorState) => void,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  editor.support.forEach((point, i) => {
    const row = doc.createElement("div");
    row.className = "editor-row";
    const label = doc.createElement("label");
    label.textContent = verbatim(point);
    const slider = doc.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1000";
    slider.value = String(Math.round(editor.mass[i] * 1000));
    slider.addEventListener("input", () => {
      const next = {
        ...editor,
        mass: setBinMass(editor.mass, i, Number(slider.value) / 1000),
        label: "custom",
      };
      onChange(next);
    });
    const mass = doc.createElement("span");
    mass.className = "mass";
    mass.textContent = verbatim(editor.mass[i]);
    row.append(label, slider, mass);
    container.append(row);
  });
}

function syncUrl(app: App): void {
  window.history.replaceState(null, "", encodeState(app.state));
}

async function runEmulation(app: App, doc: Document): Promise<void> {
  const panel = doc.getElementById("results-panel") as HTMLElement;
  const from = byLabel(app, app.state.fromLabel);
  if (!from) {
    return;
  }
  const targets: { label: string; dist: DistributionPayload }[] = [];
  for (const label of app.state.toLabels) {
    const preset = byLabel(app, label);
    if (preset) {
      targets.push({ label, dist: preset });
    }
  }
  // the editor joins in only once the user actually edited a preset
  if (app.editor && app.editor.label === "custom" && !isEmpty(app.editor.mass)) {
    targets.push({ label: "custom", dist: toDistribution(app.editor) });
  }
  if (targets.length === 0) {
    return;
  }
  const token = ++app.requestToken;
  try {
    if (targets.length === 1) {
      const payload = await app.client.postEmulate([
        {
          assumption: app.state.assumption,
          F: from,
          P: targets[0].dist,
        },
      ], app.state.ciLevel);
      if (token !== app.requestToken) {
        return; // a newer request superseded this one
      }
      renderResults(panel, payload);
    } else {
      const payloads = [];
      for (const target of targets) {
        payloads.push({
          label: target.label,
          payload: await app.client.postEmulate([
            { assumption: app.state.assumption, F: from, P: target.dist },
          ], app.state.ciLevel),
        });
      }
      if (token !== app.requestToken) {
        return;
      }
      const combined =
        payloads.length > 1
          ? await app.client.postCombine(
              payloads.map((p) => ({
                label: p.label,
                results: p.payload.results,
              })),
            )
          : null;
      if (token !== app.requestToken) {
        return;
      }
      renderCompare(panel, payloads, combined);
    }
    syncUrl(app);
  } catch (err) {
    if (token === app.requestToken && err instanceof ApiError) {
      renderError(panel, err);
    } else if (token === app.requestToken) {
      throw err;
    }
  }
}

export async function bootstrap(doc: Document, apiBase: string): Promise<App> {
  const client = new ApiClient(apiBase);
  const app: App = {
    client,
    presets: [],
    state: decodeState(window.location.hash) ?? defaultState(),
    editor: null,
    requestToken: 0,
  };
  const panel = doc.getElementById("results-panel") as HTMLElement;
  try {
    app.presets = (await client.getPresets()).presets;
  } catch (err) {
    if (err instanceof ApiError) {
      renderError(panel, err);
      return app;
    }
    throw err;
  }

  const assumptionSelect = doc.getElementById(
    "assumption-select",
  ) as HTMLSelectElement;
  const fromSelect = doc.getElementById("from-select") as HTMLSelectElement;
  const toSelect = doc.getElementById("to-select") as HTMLSelectElement;
  const editorHost = doc.getElementById("editor") as HTMLElement;
  const runButton = doc.getElementById("run-button") as HTMLButtonElement;

  const refreshSelectors = () => {
    const available = presetsFor(app, app.state.assumption);
    fromSelect.textContent = "";
    toSelect.textContent = "";
    for (const preset of available) {
      fromSelect.append(option(doc, preset.label));
      toSelect.append(option(doc, preset.label));
    }
    if (!available.some((p) => p.label === app.state.fromLabel)) {
      const literature = available.find((p) =>
        p.label.includes("literature"),
      );
      app.state.fromLabel = literature?.label ?? available[0]?.label ?? "";
    }
    fromSelect.value = app.state.fromLabel;
  };

  assumptionSelect.addEventListener("change", () => {
    app.state.assumption = assumptionSelect.value;
    app.state.toLabels = [];
    app.editor = null;
    editorHost.textContent = "";
    refreshSelectors();
    syncUrl(app);
  });
  fromSelect.addEventListener("change", () => {
    app.state.fromLabel = fromSelect.value;
    syncUrl(app);
  });
  toSelect.addEventListener("change", () => {
    app.state.toLabels = Array.from(toSelect.selectedOptions).map(
      (o) => o.value,
    );
    const preset = byLabel(app, toSelect.value);
    if (preset) {
      app.editor = fromPreset(preset);
      const handle = (next: EditorState) => {
        app.editor = next;
        renderEditor(editorHost, next, handle);
      };
      renderEditor(editorHost, app.editor, handle);
    }
    syncUrl(app);
  });
  runButton.addEventListener("click", () => {
    void runEmulation(app, doc);
  });

  const customInput = doc.getElementById(
    "custom-support",
  ) as HTMLInputElement | null;
  const customButton = doc.getElementById(
    "custom-grid-button",
  ) as HTMLButtonElement | null;
  if (customInput && customButton) {
    customButton.addEventListener("click", () => {
      const support = customInput.value
        .split(",")
        .map((s) => Number(s.trim()))
        .filter((v) => Number.isFinite(v));
      if (support.length === 0 || support.some((v, i) => i > 0 && v <= support[i - 1])) {
        return; // support must be non-empty and strictly increasing
      }
      app.editor = { ...blankEditor(app.state.assumption, support), label: "custom" };
      const handle = (next: EditorState) => {
        app.editor = next;
        renderEditor(editorHost, next, handle);
      };
      renderEditor(editorHost, app.editor, handle);
      syncUrl(app);
    });
  }

  refreshSelectors();
  return app;
}
