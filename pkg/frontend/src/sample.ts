/** Three-panel review screen: question | solution | rubric + checklist.
 *
 * Submits with revision = current + 1; a 409 from a racing reviewer opens a
 * reload prompt instead of overwriting, so no decision is ever lost silently.
 */

import { ConflictError, ReviewApi } from "./api.js";
import { renderSampleMarkdown } from "./md.js";
import {
  CHECKLIST_ITEMS,
  ReviewFormState,
  anyItemFailed,
  buildDecision,
  canSubmit,
  emptyForm,
  parseMetaDraft,
  suggestedFlagReason,
} from "./state.js";
import type { FlagReason, SampleDetail } from "./types.js";
import { FLAG_REASONS } from "./types.js";

const CHECKLIST_LABELS: Record<(typeof CHECKLIST_ITEMS)[number], string> = {
  answers_match: "Extracted answers match the ground-truth solution",
  scoring_points_reasonable: "Scoring points and values are reasonable and consistent",
  nontrivial_visual_reasoning: "Solving requires non-trivial visual reasoning",
};

export interface SampleViewHandle {
  form: ReviewFormState;
  detail: SampleDetail;
  setChecklist(item: number, value: boolean): void;
  approveAll(): void;
  flag(reason?: FlagReason): void;
  submit(): Promise<boolean>;
  refresh(): void;
}

export async function renderSampleView(
  root: HTMLElement,
  api: ReviewApi,
  sampleId: string,
  reviewerId: () => string,
  onDone: (sampleId: string) => void,
): Promise<SampleViewHandle> {
  const detail = await api.getSample(sampleId);
  const form = emptyForm();

  root.innerHTML = `<div class="review-grid">
      <section class="panel">
        <h2>Question <span class="badge">${detail.sample.subset}</span></h2>
        <div class="md" id="panel-question"></div>
      </section>
      <section class="panel">
        <h2>Solution</h2>
        <div class="md" id="panel-solution"></div>
      </section>
      <section class="panel">
        <h2>Meta <span class="badge badge-${detail.status}" id="sample-status">${detail.status}</span></h2>
        <div id="panel-meta"></div>
        <details id="meta-edit-details">
          <summary>edit rubric</summary>
          <textarea id="meta-editor" rows="12" spellcheck="false"></textarea>
          <div id="meta-editor-error" class="error"></div>
        </details>
        <h3>Review checklist</h3>
        <div id="checklist"></div>
        <div id="flag-controls" class="hidden">
          <label>Flag reason
            <select id="flag-reason">
              ${FLAG_REASONS.map((r) => `<option value="${r}">${r.replace(/_/g, " ")}</option>`).join("")}
            </select>
          </label>
          <input id="flag-note" placeholder="note (optional)">
        </div>
        <div class="actions">
          <button id="btn-submit" disabled>submit review</button>
          <span id="submit-error" class="error"></span>
        </div>
        <p class="hint">keys: <b>1/2/3</b> toggle items &middot; <b>a</b> approve &middot; <b>f</b> flag &middot; <b>n</b>/<b>p</b> next/prev &middot; <b>Enter</b> submit</p>
      </section>
    </div>
    <dialog id="conflict-dialog">
      <p>Another reviewer updated this sample while you were working; your decision was <b>not</b> saved.</p>
      <button id="conflict-reload">reload sample</button>
    </dialog>`;

  root.querySelector("#panel-question")!.innerHTML = renderSampleMarkdown(detail.sample.question_md);
  root.querySelector("#panel-solution")!.innerHTML = renderSampleMarkdown(detail.sample.solution_md);
  renderMetaPanel();

  const metaEditor = root.querySelector<HTMLTextAreaElement>("#meta-editor")!;
  if (detail.meta) {
    metaEditor.value = JSON.stringify(detail.meta, null, 2);
  }
  metaEditor.addEventListener("input", () => {
    form.metaDraft = metaEditor.value;
    const parsed = parseMetaDraft(metaEditor.value);
    root.querySelector("#meta-editor-error")!.textContent = parsed.ok ? "" : parsed.error;
    sync();
  });

  const flagSelect = root.querySelector<HTMLSelectElement>("#flag-reason")!;
  flagSelect.addEventListener("change", () => {
    form.flagReason = flagSelect.value as FlagReason;
    sync();
  });
  root.querySelector<HTMLInputElement>("#flag-note")!.addEventListener("input", (event) => {
    form.flagNote = (event.target as HTMLInputElement).value;
  });

  function renderMetaPanel(): void {
    const target = root.querySelector("#panel-meta")!;
    if (!detail.meta) {
      target.innerHTML = `<p class="hint">no rubric extracted yet</p>`;
      return;
    }
    const rows = Object.entries(detail.meta.scoring_points)
      .map(
        ([pid, description]) =>
          `<tr><td class="mono">${pid}</td><td>${description}</td><td>${detail.meta!.point_values[pid] ?? "?"}</td></tr>`,
      )
      .join("");
    const answers = Object.entries(detail.meta.answer_summary)
      .map(([key, answer]) => `<li><b>${key}</b>: ${answer}</li>`)
      .join("");
    target.innerHTML = `<table class="meta-table">
        <thead><tr><th>point</th><th>description</th><th>value</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <p>max score: <b>${detail.meta.max_score}</b> &middot; verified: ${detail.meta.verified}</p>
      <ul class="answers">${answers}</ul>`;
  }

  function renderChecklist(): void {
    const target = root.querySelector("#checklist")!;
    target.innerHTML = "";
    CHECKLIST_ITEMS.forEach((item, index) => {
      const row = document.createElement("div");
      row.className = "check-row";
      const value = form.checklist[item];
      row.innerHTML = `<span class="check-label">${index + 1}. ${CHECKLIST_LABELS[item]}</span>
        <span class="check-buttons">
          <button data-item="${index}" data-value="yes" class="${value === true ? "on" : ""}">yes</button>
          <button data-item="${index}" data-value="no" class="${value === false ? "on" : ""}">no</button>
        </span>`;
      target.appendChild(row);
    });
    target.querySelectorAll("button").forEach((button) => {
      button.addEventListener("click", () => {
        const index = Number(button.dataset.item);
        setChecklist(index, button.dataset.value === "yes");
      });
    });
  }

  function sync(): void {
    renderChecklist();
    const flagged = anyItemFailed(form);
    root.querySelector("#flag-controls")!.classList.toggle("hidden", !flagged);
    if (flagged && form.flagReason === null) {
      const suggestion = suggestedFlagReason(form);
      if (suggestion) {
        form.flagReason = suggestion;
        flagSelect.value = suggestion;
      }
    }
    if (!flagged) {
      form.flagReason = null;
    }
    root.querySelector<HTMLButtonElement>("#btn-submit")!.disabled = !canSubmit(form);
  }

  function setChecklist(index: number, value: boolean): void {
    const item = CHECKLIST_ITEMS[index];
    if (!item) return;
    form.checklist[item] = value;
    sync();
  }

  function approveAll(): void {
    for (const item of CHECKLIST_ITEMS) form.checklist[item] = true;
    sync();
  }

  function flag(reason?: FlagReason): void {
    if (form.checklist.nontrivial_visual_reasoning === null) {
      form.checklist.nontrivial_visual_reasoning = false;
    }
    for (const item of CHECKLIST_ITEMS) {
      if (form.checklist[item] === null) form.checklist[item] = true;
    }
    if (reason) form.flagReason = reason;
    sync();
  }

  async function submit(): Promise<boolean> {
    const built = buildDecision(form, reviewerId(), detail.revision);
    const errorBox = root.querySelector("#submit-error")!;
    if (!built.ok) {
      errorBox.textContent = built.error;
      return false;
    }
    try {
      await api.submitReview(detail.sample.id, built.body);
      errorBox.textContent = "";
      onDone(detail.sample.id);
      return true;
    } catch (error) {
      if (error instanceof ConflictError) {
        root.querySelector<HTMLDialogElement>("#conflict-dialog")!.showModal();
      } else {
        errorBox.textContent = `${(error as Error).message} — nothing was saved; retry when ready`;
      }
      return false;
    }
  }

  root.querySelector("#btn-submit")!.addEventListener("click", () => void submit());
  root.querySelector("#conflict-reload")!.addEventListener("click", () => {
    window.location.reload();
  });

  sync();

  return {
    form,
    detail,
    setChecklist,
    approveAll,
    flag,
    submit,
    refresh: () => window.location.reload(),
  };
}
