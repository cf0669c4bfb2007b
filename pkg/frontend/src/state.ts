/**
 * Curation view state and the optimistic action pipeline.
 *
 * The server is the source of truth: what a cell shows is a pure function
 * of (server record, local unsaved edit buffer). Edit buffers are keyed by
 * record id, so unsaved edits survive switching between samples. Actions
 * committed while offline are queued and flushed later.
 */

import { ApiClient, NetworkError, RequestError } from "./api.js";
import type { Batch, Project, RecordPayload } from "./types.js";

export type PendingAction =
  | { kind: "edit"; recordId: number; column: string; value: string }
  | { kind: "lock"; recordId: number }
  | { kind: "irrelevant"; recordId: number };

export interface VettingTarget {
  recordId: number;
  column: string;
}

export interface CurationViewState {
  project: Project | null;
  selectedSample: number | null; // batch position, 1-based
  records: RecordPayload[];
  editBuffers: Map<number, Map<string, string>>;
  pending: PendingAction[];
  offline: boolean;
  conflicts: Set<number>; // record ids needing attention after a 409
  vetting: VettingTarget | null;
  lastError: string | null;
}

export function initialState(): CurationViewState {
  return {
    project: null,
    selectedSample: null,
    records: [],
    editBuffers: new Map(),
    pending: [],
    offline: false,
    conflicts: new Set(),
    vetting: null,
    lastError: null,
  };
}

export interface CellRender {
  value: string;
  /** accepted by the server as a human edit */
  edited: boolean;
  /** locally changed, not yet committed */
  dirty: boolean;
  band: "supported" | "partial" | "unsupported" | null;
  locked: boolean;
  irrelevant: boolean;
}

/** Pure: what one cell shows, given the server record and the edit buffer. */
export function cellRenderState(
  record: RecordPayload,
  column: string,
  buffers: Map<number, Map<string, string>>,
): CellRender {
  const cell = record.cells[column];
  const buffer = buffers.get(record.record_id)?.get(column);
  const serverValue = cell?.value ?? "";
  const dirty = buffer !== undefined && buffer !== serverValue;
  return {
    value: dirty ? (buffer as string) : serverValue,
    edited: cell?.edited ?? false,
    dirty,
    band: cell?.provenance?.band ?? null,
    locked: record.status === "locked",
    irrelevant: record.status === "irrelevant",
  };
}

export function setEditBuffer(
  state: CurationViewState,
  recordId: number,
  column: string,
  value: string,
): void {
  let forRecord = state.editBuffers.get(recordId);
  if (!forRecord) {
    forRecord = new Map();
    state.editBuffers.set(recordId, forRecord);
  }
  forRecord.set(column, value);
}

function clearBuffer(state: CurationViewState, recordId: number, column?: string): void {
  const forRecord = state.editBuffers.get(recordId);
  if (!forRecord) return;
  if (column === undefined) {
    state.editBuffers.delete(recordId);
    return;
  }
  forRecord.delete(column);
  if (forRecord.size === 0) state.editBuffers.delete(recordId);
}

function replaceRecord(state: CurationViewState, updated: RecordPayload): void {
  state.records = state.records.map((r) =>
    r.record_id === updated.record_id ? updated : r,
  );
}

export async function loadProject(
  state: CurationViewState,
  api: ApiClient,
  projectId: number,
): Promise<void> {
  state.project = await api.getProject(projectId);
}

export async function selectSample(
  state: CurationViewState,
  api: ApiClient,
  position: number,
): Promise<Batch | null> {
  if (!state.project) return null;
  const sample = state.project.samples.find((s) => s.position === position);
  if (!sample) return null;
  const batch = await api.getBatch(sample.batch_id);
  state.selectedSample = position;
  state.records = batch.records;
  // edit buffers intentionally survive the switch
  return batch;
}

async function refetchCurrentSample(state: CurationViewState, api: ApiClient): Promise<void> {
  if (state.project && state.selectedSample !== null) {
    await selectSample(state, api, state.selectedSample);
  }
}

function applyOptimistic(state: CurationViewState, action: PendingAction): RecordPayload[] {
  const snapshot = state.records;
  state.records = state.records.map((record) => {
    if (record.record_id !== (action as { recordId: number }).recordId) return record;
    if (action.kind === "edit") {
      const cell = record.cells[action.column] ?? { value: "", edited: false, provenance: null };
      return {
        ...record,
        status: record.status === "generated" ? "edited" : record.status,
        cells: {
          ...record.cells,
          [action.column]: { ...cell, value: action.value, edited: true },
        },
      };
    }
    if (action.kind === "lock") return { ...record, status: "locked" };
    return { ...record, status: "irrelevant" };
  });
  return snapshot;
}

async function send(api: ApiClient, action: PendingAction): Promise<RecordPayload> {
  switch (action.kind) {
    case "edit":
      return api.editCell(action.recordId, action.column, action.value);
    case "lock":
      return (await api.lockRecord(action.recordId)).record;
    case "irrelevant":
      return api.markIrrelevant(action.recordId);
  }
}

export interface CommitResult {
  applied: number;
  queued: number;
  conflicts: number;
}

/**
 * Commit actions in user order with optimistic updates.
 *
 * Network failures queue the remaining actions (offline banner); server
 * rejections roll the optimistic change back — a RecordLocked conflict
 * additionally re-fetches the sample and highlights the record.
 */
export async function commitActions(
  state: CurationViewState,
  api: ApiClient,
  actions: PendingAction[],
): Promise<CommitResult> {
  const result: CommitResult = { applied: 0, queued: 0, conflicts: 0 };
  const queue = [...actions];
  while (queue.length > 0) {
    const action = queue.shift() as PendingAction;
    const snapshot = applyOptimistic(state, action);
    try {
      const updated = await send(api, action);
      replaceRecord(state, updated);
      if (action.kind === "edit") clearBuffer(state, action.recordId, action.column);
      result.applied += 1;
    } catch (err) {
      state.records = snapshot; // rollback
      if (err instanceof NetworkError) {
        state.offline = true;
        state.pending.push(action, ...queue);
        result.queued = 1 + queue.length;
        return result;
      }
      if (err instanceof RequestError) {
        state.lastError = err.message;
        if (err.code === "record_locked" || err.code === "already_locked") {
          state.conflicts.add(action.recordId);
          result.conflicts += 1;
          await refetchCurrentSample(state, api);
        }
        continue; // a rejected action does not block the rest
      }
      throw err;
    }
  }
  return result;
}

/** Retry everything queued while offline; clears the banner on success. */
export async function flushPending(
  state: CurationViewState,
  api: ApiClient,
): Promise<CommitResult> {
  const queued = state.pending;
  state.pending = [];
  const result = await commitActions(state, api, queued);
  if (result.queued === 0) state.offline = false;
  return result;
}
