/**
 * Panel renderers.  Each panel keeps the service payload it was rendered
 * from on the container (data attribute + property), and every numeric
 * string it writes into the DOM is the verbatim representation of a
 * value in that payload.
 */

import type {
  ApiError,
  CombineResponse,
  EmulateResponse,
  EmulationRow,
} from "./api.js";
import { cdfChart, compareChart, differenceChart } from "./charts.js";

/** Verbatim rendering of a payload number. */
export function verbatim(value: number): string {
  return String(value);
}

export const SUMMARY_TAUS = [0.05, 0.5, 0.95];

function clear(container: HTMLElement): void {
  container.textContent = "";
  delete (container as HTMLElement & { payload?: unknown }).payload;
}

function attachPayload(container: HTMLElement, payload: unknown): void {
  (container as HTMLElement & { payload?: unknown }).payload = payload;
  container.dataset.payload = JSON.stringify(payload);
}

export function capturedPayload(container: HTMLElement): unknown {
  return (container as HTMLElement & { payload?: unknown }).payload;
}

function summaryRows(rows: EmulationRow[]): EmulationRow[] {
  return SUMMARY_TAUS.map((tau) => rows.find((r) => r.tau === tau)).filter(
    (r): r is EmulationRow => r !== undefined,
  );
}

function buildTable(doc: Document, rows: EmulationRow[]): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "summary-table";
  const head = table.createTHead().insertRow();
  for (const name of [
    "tau",
    "observed",
    "emulated",
    "shift",
    "se",
    "ci_low",
    "ci_high",
  ]) {
    const th = doc.createElement("th");
    th.textContent = name;
    head.append(th);
  }
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    for (const value of [
      row.tau,
      row.scc_observed,
      row.scc_emulated,
      row.shift,
      row.se,
      row.ci_low,
      row.ci_high,
    ]) {
      tr.insertCell().textContent = verbatim(value);
    }
  }
  return table;
}

/** Observed vs emulated CDFs, the difference-with-CI panel, summary table. */
export function renderResults(
  container: HTMLElement,
  payload: EmulateResponse,
): void {
  const doc = container.ownerDocument;
  clear(container);
  attachPayload(container, payload);
  for (const warning of payload.warnings ?? []) {
    const note = doc.createElement("p");
    note.className = "warning";
    note.textContent = warning;
    container.append(note);
  }
  container.append(buildTable(doc, summaryRows(payload.results)));
  container.append(cdfChart(doc, payload.results));
  container.append(differenceChart(doc, payload.results));
}

/** Overlaid per-source difference curves plus the combined-bias curve. */
export function renderCompare(
  container: HTMLElement,
  sources: { label: string; payload: EmulateResponse }[],
  combined: CombineResponse | null,
): void {
  const doc = container.ownerDocument;
  clear(container);
  attachPayload(container, { sources, combined });
  container.append(
    compareChart(
      doc,
      sources.map((s) => ({ label: s.label, rows: s.payload.results })),
      combined ? combined.results : null,
    ),
  );
  const list = doc.createElement("ul");
  list.className = "compare-medians";
  for (const source of sources) {
    const median = source.payload.results.find((r) => r.tau === 0.5);
    if (!median) {
      continue;
    }
    const li = doc.createElement("li");
    li.textContent = `${source.label}: ${verbatim(median.shift)}`;
    list.append(li);
  }
  if (combined) {
    const median = combined.results.find((r) => r.tau === 0.5);
    if (median) {
      const li = doc.createElement("li");
      li.className = "combined";
      li.textContent = `combined: ${verbatim(median.mu_combined)}`;
      list.append(li);
    }
  }
  container.append(list);
}

/** Error banner; stale panel content is removed, nothing is recomputed. */
export function renderError(container: HTMLElement, error: ApiError): void {
  const doc = container.ownerDocument;
  clear(container);
  const banner = doc.createElement("div");
  banner.className = "error-banner";
  banner.setAttribute("role", "alert");
  banner.textContent =
    error.status === 0
      ? `service unreachable: ${String(error.body)}`
      : `service error ${error.status}: ${JSON.stringify(error.body)}`;
  container.append(banner);
}
