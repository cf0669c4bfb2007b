/**
 * Browser bootstrap: owns the DOM, delegates events to the view-model.
 * All state changes flow through state.ts; all server I/O through api.ts.
 */

import { ApiClient } from "./api.js";
import {
  commitActions,
  flushPending,
  initialState,
  loadProject,
  selectSample,
  setEditBuffer,
  type CurationViewState,
} from "./state.js";
import {
  renderRecordTable,
  renderSampleHistory,
  renderVettingPanel,
  visibleWindow,
} from "./views.js";

const ROW_HEIGHT = 32;

export function mount(root: HTMLElement, api: ApiClient, projectId: number): void {
  const state: CurationViewState = initialState();
  const history = document.createElement("nav");
  const table = document.createElement("main");
  const panel = document.createElement("div");
  root.append(history, table, panel);

  function render(): void {
    history.innerHTML = renderSampleHistory(state.project, state.selectedSample);
    const window = visibleWindow(
      state.records.length,
      ROW_HEIGHT,
      table.scrollTop,
      table.clientHeight || 800,
    );
    table.innerHTML = renderRecordTable(
      state,
      state.records.length > 500 ? window : undefined,
    );
  }

  async function openVetting(recordId: number): Promise<void> {
    const record = state.records.find((r) => r.record_id === recordId);
    if (!record || !state.project) return;
    const column = state.project.schema[0].name;
    state.vetting = { recordId, column };
    const [provenance, support] = await Promise.all([
      api.getProvenance(recordId),
      api.getSupport(recordId, column, 3),
    ]);
    panel.innerHTML = renderVettingPanel(record, column, provenance, support);
  }

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const recordId = Number(target.dataset.recordId ?? "0");
    switch (target.dataset.action) {
      case "select-sample":
        void selectSample(state, api, Number(target.dataset.position)).then(render);
        break;
      case "lock":
        void commitActions(state, api, [{ kind: "lock", recordId }]).then(render);
        break;
      case "irrelevant":
        void commitActions(state, api, [{ kind: "irrelevant", recordId }]).then(render);
        break;
      case "vet":
        void openVetting(recordId);
        break;
      case "explain": {
        const column = target.dataset.column ?? "";
        void api.explain(recordId, column).then((response) => {
          const slot = panel.querySelector('[data-role="explanation"]');
          if (slot) slot.textContent = response.explanation;
        });
        break;
      }
    }
  });

  // commit a cell edit when focus leaves it
  root.addEventListener(
    "blur",
    (event) => {
      const cell = event.target as HTMLElement;
      if (cell.dataset?.action !== "edit-cell") return;
      const recordId = Number(cell.dataset.recordId);
      const column = cell.dataset.column ?? "";
      const value = cell.textContent ?? "";
      setEditBuffer(state, recordId, column, value);
      void commitActions(state, api, [{ kind: "edit", recordId, column, value }]).then(render);
    },
    true,
  );

  table.addEventListener("scroll", render);
  window.addEventListener("online", () => void flushPending(state, api).then(render));

  void loadProject(state, api, projectId)
    .then(() => {
      const latest = state.project?.samples.at(-1);
      return latest ? selectSample(state, api, latest.position) : null;
    })
    .then(render);
}

declare global {
  interface Window {
    litcurateMount?: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.litcurateMount = mount;
}
