/** Queue view: filterable, paginated sample list. */

import type { ReviewApi } from "./api.js";
import type { QueuePage, ReviewStatus } from "./types.js";

export interface QueueViewState {
  status: ReviewStatus | "";
  page: number;
  pageSize: number;
}

export function renderQueueView(
  root: HTMLElement,
  api: ReviewApi,
  state: QueueViewState,
  onOpen: (sampleId: string) => void,
  onStateChange: (next: QueueViewState) => void,
): Promise<QueuePage> {
  root.innerHTML = `<div class="queue-toolbar">
      <label>Status
        <select id="queue-status">
          <option value="">all</option>
          <option value="pending">pending</option>
          <option value="approved">approved</option>
          <option value="flagged">flagged</option>
        </select>
      </label>
      <span id="queue-count"></span>
      <span class="spacer"></span>
      <button id="queue-prev">&laquo; prev</button>
      <span id="queue-page"></span>
      <button id="queue-next">next &raquo;</button>
      <a href="/api/export/benchmark" target="_blank">export benchmark</a>
    </div>
    <table class="queue-table">
      <thead><tr><th>id</th><th>subset</th><th>lang</th><th>knowledge</th><th>status</th><th>rev</th></tr></thead>
      <tbody id="queue-body"><tr><td colspan="6">loading…</td></tr></tbody>
    </table>`;

  const statusSelect = root.querySelector<HTMLSelectElement>("#queue-status")!;
  statusSelect.value = state.status;
  statusSelect.addEventListener("change", () => {
    onStateChange({ ...state, status: statusSelect.value as ReviewStatus | "", page: 0 });
  });
  root.querySelector<HTMLButtonElement>("#queue-prev")!.addEventListener("click", () => {
    if (state.page > 0) onStateChange({ ...state, page: state.page - 1 });
  });
  root.querySelector<HTMLButtonElement>("#queue-next")!.addEventListener("click", () => {
    onStateChange({ ...state, page: state.page + 1 });
  });

  return api.getQueue(state.status, state.page, state.pageSize).then((page) => {
    const body = root.querySelector<HTMLTableSectionElement>("#queue-body")!;
    body.innerHTML = "";
    for (const item of page.items) {
      const row = document.createElement("tr");
      row.className = `status-${item.status}`;
      const knowledge = item.sample.knowledge
        ? `${item.sample.knowledge.root} / ${item.sample.knowledge.point}`
        : "—";
      row.innerHTML = `<td class="mono">${item.sample.id}</td>
        <td>${item.sample.subset}</td>
        <td>${item.sample.language}</td>
        <td>${knowledge}</td>
        <td><span class="badge badge-${item.status}">${item.status}</span></td>
        <td>${item.revision}</td>`;
      row.addEventListener("click", () => onOpen(item.sample.id));
      body.appendChild(row);
    }
    if (page.items.length === 0) {
      body.innerHTML = `<tr><td colspan="6">nothing ${state.status || "here"} on this page</td></tr>`;
    }
    root.querySelector("#queue-count")!.textContent = `${page.total} matching`;
    root.querySelector("#queue-page")!.textContent = `page ${page.page + 1}`;
    return page;
  });
}
