/** Trace browser: pick a run, fetch one sample's trace, walk the segments. */

import { ApiError, ReviewApi } from "./api.js";
import { escapeHtml } from "./md.js";
import type { TraceRecord } from "./types.js";

export async function renderTraceView(root: HTMLElement, api: ReviewApi): Promise<void> {
  const runs = await api.getRuns();
  root.innerHTML = `<div class="queue-toolbar">
      <label>Run
        <select id="trace-run">${runs.map((r) => `<option>${r}</option>`).join("")}</select>
      </label>
      <label>Sample <input id="trace-sample" placeholder="sample id"></label>
      <button id="trace-load">load trace</button>
      <span id="trace-error" class="error"></span>
    </div>
    <div id="trace-body"></div>`;
  if (runs.length === 0) {
    root.querySelector("#trace-body")!.innerHTML = `<p class="hint">no runs recorded yet</p>`;
    return;
  }

  root.querySelector("#trace-load")!.addEventListener("click", async () => {
    const runId = root.querySelector<HTMLSelectElement>("#trace-run")!.value;
    const sampleId = root.querySelector<HTMLInputElement>("#trace-sample")!.value.trim();
    const errorBox = root.querySelector("#trace-error")!;
    if (!sampleId) {
      errorBox.textContent = "enter a sample id";
      return;
    }
    try {
      const trace = await api.getTrace(runId, sampleId);
      errorBox.textContent = "";
      root.querySelector("#trace-body")!.innerHTML = renderTrace(trace);
    } catch (error) {
      errorBox.textContent = error instanceof ApiError ? error.message : String(error);
    }
  });
}

export function renderTrace(trace: TraceRecord): string {
  const header = `<p class="hint">model <b>${trace.model_id}</b>
    &middot; ${trace.truncated ? "truncated" : "completed"}
    &middot; ${trace.token_usage.text_tokens} text + ${trace.token_usage.code_tokens} code tokens
    &middot; ${trace.token_usage.figures} figures</p>`;
  const body = trace.segments
    .map((segment) => {
      switch (segment.kind) {
        case "code":
          return `<pre class="segment segment-code"><code>${escapeHtml(segment.payload)}</code></pre>`;
        case "figure":
          return `<div class="segment segment-figure"><img src="${segment.url ?? segment.payload}" alt="figure"></div>`;
        case "final_answer":
          return `<div class="segment segment-answer">${escapeHtml(segment.payload)}</div>`;
        default: {
          const cls = segment.origin === "sandbox" ? "segment-sandbox" : "segment-text";
          return `<div class="segment ${cls}">${escapeHtml(segment.payload)}</div>`;
        }
      }
    })
    .join("");
  return header + body;
}
