/**
 * Pure view renderers: state in, HTML string out. The mounting layer in
 * main.ts owns the DOM; keeping renderers pure makes them testable without
 * a browser.
 */

import { cellRenderState, type CurationViewState } from "./state.js";
import type {
  Project,
  ProvenanceResponse,
  RecordPayload,
  SupportResponse,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Convert the service's **bold** highlight markers into <strong> tags. */
export function highlightedToHtml(text: string): string {
  const escaped = escapeHtml(text);
  let bold = false;
  let out = "";
  let i = 0;
  while (i < escaped.length) {
    if (escaped.startsWith("**", i)) {
      out += bold ? "</strong>" : "<strong>";
      bold = !bold;
      i += 2;
    } else {
      out += escaped[i];
      i += 1;
    }
  }
  if (bold) out += "</strong>";
  return out;
}

export function renderSampleHistory(project: Project | null, selected: number | null): string {
  if (!project) {
    return `<div class="empty-state">No project loaded.</div>`;
  }
  if (project.samples.length === 0) {
    return (
      `<div class="empty-state" data-empty="samples">` +
      `No extractions yet - run a pilot batch to get started.</div>`
    );
  }
  const items = project.samples
    .map((sample) => {
      const active = sample.position === selected ? " active" : "";
      return (
        `<li class="sample-entry${active}" data-action="select-sample"` +
        ` data-position="${sample.position}" data-batch-id="${sample.batch_id}">` +
        `Sample ${sample.position} <span class="phase">${sample.phase}</span>` +
        ` <span class="pool">pool v${sample.pool_version_used}</span></li>`
      );
    })
    .join("");
  return `<section class="previous-extractions"><h2>Previous Extractions</h2><ul>${items}</ul></section>`;
}

export interface TableWindow {
  start: number;
  count: number;
}

/** Which rows to materialize for a scroll position (virtualized table). */
export function visibleWindow(
  totalRows: number,
  rowHeight: number,
  scrollTop: number,
  viewportHeight: number,
  overscan = 5,
): TableWindow {
  if (totalRows === 0 || rowHeight <= 0) return { start: 0, count: 0 };
  const first = Math.floor(scrollTop / rowHeight);
  const visible = Math.ceil(viewportHeight / rowHeight);
  const start = Math.max(0, first - overscan);
  const end = Math.min(totalRows, first + visible + overscan);
  return { start, count: Math.max(0, end - start) };
}

const BAND_CLASS: Record<string, string> = {
  supported: "band-supported", // green
  partial: "band-partial", // amber
  unsupported: "band-unsupported", // red
};

function renderCell(
  record: RecordPayload,
  column: string,
  state: CurationViewState,
): string {
  const cell = cellRenderState(record, column, state.editBuffers);
  const classes = ["cell"];
  if (cell.edited || cell.dirty) classes.push("cell-edited"); // the yellow mark
  if (cell.dirty) classes.push("cell-dirty");
  if (cell.band) classes.push(BAND_CLASS[cell.band]);
  const editable = !cell.locked && !cell.irrelevant;
  return (
    `<td class="${classes.join(" ")}" data-record-id="${record.record_id}"` +
    ` data-column="${escapeHtml(column)}"` +
    (editable ? ` data-action="edit-cell" contenteditable="true"` : "") +
    `>${escapeHtml(cell.value)}</td>`
  );
}

export function renderRecordTable(state: CurationViewState, window?: TableWindow): string {
  if (!state.project) return `<div class="empty-state">No project loaded.</div>`;
  const columns = state.project.schema.map((c) => c.name);
  const rows = state.records;
  const slice = window
    ? rows.slice(window.start, window.start + window.count)
    : rows;
  const header =
    `<tr><th>doc</th>` +
    columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("") +
    `<th>status</th></tr>`;
  const body = slice
    .map((record) => {
      const rowClasses = ["record-row", `status-${record.status}`];
      if (state.conflicts.has(record.record_id)) rowClasses.push("conflict");
      const cells = columns.map((c) => renderCell(record, c, state)).join("");
      const actions =
        record.status === "locked" || record.status === "irrelevant"
          ? ""
          : ` <button data-action="lock" data-record-id="${record.record_id}">lock</button>` +
            `<button data-action="irrelevant" data-record-id="${record.record_id}">irrelevant</button>`;
      return (
        `<tr class="${rowClasses.join(" ")}" data-record-id="${record.record_id}">` +
        `<td class="doc-id">${escapeHtml(record.doc_id)}` +
        `<button data-action="vet" data-record-id="${record.record_id}">vet</button></td>` +
        cells +
        `<td class="status">${record.status}${actions}</td></tr>`
      );
    })
    .join("");
  const banner = state.offline
    ? `<div class="banner banner-offline">Offline - ${state.pending.length} action(s) queued.</div>`
    : "";
  return `${banner}<table class="record-table">${header}${body}</table>`;
}

export function renderVettingPanel(
  record: RecordPayload,
  column: string,
  provenance: ProvenanceResponse,
  support: SupportResponse,
): string {
  const grade = provenance.cells[column];
  const band = grade?.band ?? "unsupported";
  const badge =
    `<span class="badge ${BAND_CLASS[band]}" data-band="${band}">` +
    `${band} (${grade?.ratio ?? 0})</span>`;
  const paragraphs = support.paragraphs
    .map(
      (p) =>
        `<li class="support-paragraph" data-index="${p.index}">` +
        `<span class="score">${p.score.toFixed(3)}</span> ` +
        `${highlightedToHtml(p.highlighted)}</li>`,
    )
    .join("");
  const alt = record.alt
    ? `<div class="alternative">Alternative (${escapeHtml(record.alt.origin ?? "?")}, ` +
      `similarity ${record.alt.score?.toFixed(3) ?? "?"}): ` +
      `<code>${escapeHtml(record.alt.values[column] ?? "")}</code></div>`
    : "";
  return (
    `<aside class="vetting-panel" data-record-id="${record.record_id}"` +
    ` data-column="${escapeHtml(column)}">` +
    `<h3>${escapeHtml(column)} ${badge}</h3>` +
    alt +
    `<ol class="support">${paragraphs}</ol>` +
    `<button data-action="explain" data-record-id="${record.record_id}"` +
    ` data-column="${escapeHtml(column)}">explain</button>` +
    `<div class="explanation" data-role="explanation"></div>` +
    `</aside>`
  );
}
