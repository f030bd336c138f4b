/** Hash-routed shell: #/queue, #/sample/<id>, #/traces. */

import { ReviewApi } from "./api.js";
import { actionForKey, isTypingTarget } from "./keyboard.js";
import { renderQueueView, QueueViewState } from "./queue.js";
import { renderSampleView, SampleViewHandle } from "./sample.js";
import { nextSampleId } from "./state.js";
import { renderTraceView } from "./traces.js";

const api = new ReviewApi("", localStorage.getItem("reviewerToken"));
const root = document.getElementById("app")!;

let queueState: QueueViewState = { status: "", page: 0, pageSize: 50 };
let queueIds: string[] = [];
let activeSample: SampleViewHandle | null = null;

function reviewerId(): string {
  const input = document.getElementById("reviewer-id") as HTMLInputElement;
  return input.value;
}

function navigate(hash: string): void {
  window.location.hash = hash;
}

async function route(): Promise<void> {
  const hash = window.location.hash || "#/queue";
  activeSample = null;
  if (hash.startsWith("#/sample/")) {
    const sampleId = decodeURIComponent(hash.slice("#/sample/".length));
    activeSample = await renderSampleView(root, api, sampleId, reviewerId, (done) => {
      const next = nextSampleId(queueIds, done);
      navigate(next ? `#/sample/${encodeURIComponent(next)}` : "#/queue");
    });
  } else if (hash.startsWith("#/traces")) {
    await renderTraceView(root, api);
  } else {
    const page = await renderQueueView(
      root,
      api,
      queueState,
      (sampleId) => navigate(`#/sample/${encodeURIComponent(sampleId)}`),
      (next) => {
        queueState = next;
        void route();
      },
    );
    queueIds = page.items.map((item) => item.sample.id);
  }
}

document.addEventListener("keydown", (event) => {
  if (isTypingTarget(event.target) || event.ctrlKey || event.metaKey || event.altKey) {
    return;
  }
  const action = actionForKey(event.key);
  if (!action || !activeSample) return;
  event.preventDefault();
  switch (action.kind) {
    case "approve":
      activeSample.approveAll();
      break;
    case "flag":
      activeSample.flag();
      break;
    case "toggle-item": {
      const current = activeSample.form.checklist;
      const keys = ["answers_match", "scoring_points_reasonable", "nontrivial_visual_reasoning"] as const;
      const key = keys[action.item];
      activeSample.setChecklist(action.item, current[key] !== true);
      break;
    }
    case "submit":
      void activeSample.submit();
      break;
    case "next":
    case "prev": {
      const step = action.kind === "next" ? 1 : -1;
      const target = nextSampleId(queueIds, activeSample.detail.sample.id, step);
      if (target) navigate(`#/sample/${encodeURIComponent(target)}`);
      break;
    }
  }
});

document.getElementById("nav-queue")!.addEventListener("click", () => navigate("#/queue"));
document.getElementById("nav-traces")!.addEventListener("click", () => navigate("#/traces"));
(document.getElementById("reviewer-id") as HTMLInputElement).value =
  localStorage.getItem("reviewerId") ?? "";
document.getElementById("reviewer-id")!.addEventListener("change", (event) => {
  localStorage.setItem("reviewerId", (event.target as HTMLInputElement).value);
});

window.addEventListener("hashchange", () => void route());
void route();
