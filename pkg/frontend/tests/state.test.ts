import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  cellRenderState,
  commitActions,
  flushPending,
  initialState,
  loadProject,
  selectSample,
  setEditBuffer,
  type CurationViewState,
} from "../src/state.js";
import { FakeServer } from "./fake_server.js";

describe("curation view state", () => {
  let server: FakeServer;
  let api: ApiClient;
  let state: CurationViewState;

  beforeEach(async () => {
    server = new FakeServer(["Material", "Value"]);
    api = new ApiClient("", server.fetch);
    state = initialState();
    await loadProject(state, api, 1);
    await selectSample(state, api, 1);
  });

  it("cell render state is a pure function of record + buffer", () => {
    const record = state.records[0];
    const before = cellRenderState(record, "Material", state.editBuffers);
    expect(before.value).toBe("material-1-0");
    expect(before.dirty).toBe(false);
    expect(before.edited).toBe(false);
    expect(before.band).toBe("supported");

    setEditBuffer(state, record.record_id, "Material", "changed");
    const after = cellRenderState(record, "Material", state.editBuffers);
    expect(after.value).toBe("changed");
    expect(after.dirty).toBe(true);
    // same inputs, same answer: no hidden state
    expect(cellRenderState(record, "Material", state.editBuffers)).toEqual(after);
  });

  it("a buffer equal to the server value is not dirty", () => {
    const record = state.records[0];
    setEditBuffer(state, record.record_id, "Material", record.cells["Material"].value);
    expect(cellRenderState(record, "Material", state.editBuffers).dirty).toBe(false);
  });

  it("unsaved edits survive sample switching", async () => {
    const record = state.records[0];
    setEditBuffer(state, record.record_id, "Value", "draft");
    await selectSample(state, api, 2);
    expect(state.selectedSample).toBe(2);
    await selectSample(state, api, 1);
    const again = state.records.find((r) => r.record_id === record.record_id)!;
    const render = cellRenderState(again, "Value", state.editBuffers);
    expect(render.value).toBe("draft");
    expect(render.dirty).toBe(true);
  });

  it("committed edits clear the buffer and adopt the server record", async () => {
    const record = state.records[0];
    setEditBuffer(state, record.record_id, "Value", "42 GPa");
    const result = await commitActions(state, api, [
      { kind: "edit", recordId: record.record_id, column: "Value", value: "42 GPa" },
    ]);
    expect(result).toEqual({ applied: 1, queued: 0, conflicts: 0 });
    const updated = state.records.find((r) => r.record_id === record.record_id)!;
    expect(updated.cells["Value"].value).toBe("42 GPa");
    expect(updated.cells["Value"].edited).toBe(true);
    expect(updated.status).toBe("edited");
    expect(updated.version).toBe(1);
    expect(state.editBuffers.has(record.record_id)).toBe(false);
  });

  it("actions run in user order: edit then lock yields two audit events", async () => {
    const record = state.records[0];
    await commitActions(state, api, [
      { kind: "edit", recordId: record.record_id, column: "Value", value: "v" },
      { kind: "lock", recordId: record.record_id },
    ]);
    expect(server.audit.map((e) => e.kind)).toEqual(["updating_value", "locking_data"]);
    const updated = state.records.find((r) => r.record_id === record.record_id)!;
    expect(updated.status).toBe("locked");
  });

  it("locking removes the row from the editable set", async () => {
    const record = state.records[0];
    await commitActions(state, api, [{ kind: "lock", recordId: record.record_id }]);
    const updated = state.records.find((r) => r.record_id === record.record_id)!;
    expect(cellRenderState(updated, "Value", state.editBuffers).locked).toBe(true);
  });

  it("a RecordLocked conflict rolls back, re-fetches, and highlights", async () => {
    const record = state.records[0];
    // lock behind the UI's back
    await api.lockRecord(record.record_id);
    const result = await commitActions(state, api, [
      { kind: "edit", recordId: record.record_id, column: "Value", value: "stale" },
    ]);
    expect(result.conflicts).toBe(1);
    expect(state.conflicts.has(record.record_id)).toBe(true);
    const refreshed = state.records.find((r) => r.record_id === record.record_id)!;
    expect(refreshed.status).toBe("locked"); // re-fetched server truth
    expect(refreshed.cells["Value"].value).toBe("value-1-0"); // rollback held
  });

  it("offline commits queue with a banner and flush later", async () => {
    const record = state.records[0];
    server.offline = true;
    const result = await commitActions(state, api, [
      { kind: "edit", recordId: record.record_id, column: "Value", value: "queued" },
      { kind: "lock", recordId: record.record_id },
    ]);
    expect(result.applied).toBe(0);
    expect(result.queued).toBe(2);
    expect(state.offline).toBe(true);
    expect(state.pending).toHaveLength(2);
    // rollback: server truth still rendered
    const unchanged = state.records.find((r) => r.record_id === record.record_id)!;
    expect(unchanged.cells["Value"].value).toBe("value-1-0");

    server.offline = false;
    const flushed = await flushPending(state, api);
    expect(flushed.applied).toBe(2);
    expect(state.offline).toBe(false);
    expect(state.pending).toHaveLength(0);
    const final = state.records.find((r) => r.record_id === record.record_id)!;
    expect(final.status).toBe("locked");
    expect(final.cells["Value"].value).toBe("queued");
  });

  it("a rejected action does not block the rest of the queue", async () => {
    const [first, second] = state.records;
    await api.lockRecord(first.record_id);
    const result = await commitActions(state, api, [
      { kind: "edit", recordId: first.record_id, column: "Value", value: "nope" },
      { kind: "edit", recordId: second.record_id, column: "Value", value: "fine" },
    ]);
    expect(result.conflicts).toBe(1);
    expect(result.applied).toBe(1);
    const ok = state.records.find((r) => r.record_id === second.record_id)!;
    expect(ok.cells["Value"].value).toBe("fine");
  });
});
