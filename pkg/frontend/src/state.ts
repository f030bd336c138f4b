/** Review form state and its invariants, kept pure for testability.
 *
 * The checklist mirrors what annotators verify: the extracted answers match
 * the ground-truth solution, the scoring points are reasonable, and solving
 * genuinely needs visual reasoning. Submission is enabled only once every
 * item is answered; any "no" forces a flag with a reason.
 */

import type { FlagReason, ReviewBody, SampleMeta } from "./types.js";

export interface ChecklistState {
  answers_match: boolean | null;
  scoring_points_reasonable: boolean | null;
  nontrivial_visual_reasoning: boolean | null;
}

export interface ReviewFormState {
  checklist: ChecklistState;
  flagReason: FlagReason | null;
  flagNote: string;
  metaDraft: string | null; // JSON text of an edited rubric, if the reviewer touched it
}

export const CHECKLIST_ITEMS: (keyof ChecklistState)[] = [
  "answers_match",
  "scoring_points_reasonable",
  "nontrivial_visual_reasoning",
];

export function emptyForm(): ReviewFormState {
  return {
    checklist: {
      answers_match: null,
      scoring_points_reasonable: null,
      nontrivial_visual_reasoning: null,
    },
    flagReason: null,
    flagNote: "",
    metaDraft: null,
  };
}

export function checklistComplete(form: ReviewFormState): boolean {
  return CHECKLIST_ITEMS.every((item) => form.checklist[item] !== null);
}

export function anyItemFailed(form: ReviewFormState): boolean {
  return CHECKLIST_ITEMS.some((item) => form.checklist[item] === false);
}

export function impliedVerdict(form: ReviewFormState): "approved" | "flagged" {
  return anyItemFailed(form) ? "flagged" : "approved";
}

/** A default flag reason derived from which checklist item failed. */
export function suggestedFlagReason(form: ReviewFormState): FlagReason | null {
  if (form.checklist.nontrivial_visual_reasoning === false) return "trivial_visual_reasoning";
  if (form.checklist.answers_match === false) return "answer_mismatch";
  if (form.checklist.scoring_points_reasonable === false) return "bad_scoring_points";
  return null;
}

export function canSubmit(form: ReviewFormState): boolean {
  if (!checklistComplete(form)) return false;
  if (anyItemFailed(form) && form.flagReason === null) return false;
  if (form.metaDraft !== null && !parseMetaDraft(form.metaDraft).ok) return false;
  return true;
}

export type MetaParse =
  | { ok: true; meta: SampleMeta }
  | { ok: false; error: string };

/** Client-side mirror of the server's rubric invariants, so bad edits fail
 * fast instead of round-tripping to a 422. */
export function parseMetaDraft(draft: string): MetaParse {
  let parsed: unknown;
  try {
    parsed = JSON.parse(draft);
  } catch (error) {
    return { ok: false, error: `not valid JSON: ${(error as Error).message}` };
  }
  const meta = parsed as SampleMeta;
  if (typeof meta !== "object" || meta === null) return { ok: false, error: "rubric must be an object" };
  if (!meta.scoring_points || !meta.point_values) {
    return { ok: false, error: "rubric needs scoring_points and point_values" };
  }
  const pointIds = Object.keys(meta.scoring_points).sort();
  const valueIds = Object.keys(meta.point_values).sort();
  if (pointIds.length === 0) return { ok: false, error: "rubric has no scoring points" };
  if (JSON.stringify(pointIds) !== JSON.stringify(valueIds)) {
    return { ok: false, error: "scoring_points and point_values must share the same point ids" };
  }
  const values = Object.values(meta.point_values);
  if (values.some((v) => !Number.isInteger(v) || v < 1)) {
    return { ok: false, error: "every point value must be an integer >= 1" };
  }
  const total = values.reduce((a, b) => a + b, 0);
  if (meta.max_score !== total) {
    return { ok: false, error: `max_score ${meta.max_score} != sum of point values ${total}` };
  }
  const answers = Object.keys(meta.answer_summary ?? {}).length;
  if (meta.total_answer !== answers) {
    return { ok: false, error: `total_answer ${meta.total_answer} != ${answers} summarized answers` };
  }
  return { ok: true, meta };
}

export type DecisionBuild =
  | { ok: true; body: ReviewBody }
  | { ok: false; error: string };

/** Turn a completed form into the POST body, carrying current revision + 1
 * for the optimistic concurrency check. */
export function buildDecision(
  form: ReviewFormState,
  reviewerId: string,
  currentRevision: number,
): DecisionBuild {
  if (!reviewerId.trim()) return { ok: false, error: "reviewer id is required" };
  if (!checklistComplete(form)) return { ok: false, error: "answer every checklist item first" };
  const verdict = impliedVerdict(form);
  if (verdict === "flagged" && form.flagReason === null) {
    return { ok: false, error: "a flag reason is required when any checklist item fails" };
  }
  const body: ReviewBody = {
    reviewer_id: reviewerId.trim(),
    verdict,
    revision: currentRevision + 1,
  };
  if (verdict === "flagged") {
    body.flag_reason = form.flagReason!;
    if (form.flagNote.trim()) body.flag_note = form.flagNote.trim();
  }
  if (form.metaDraft !== null) {
    const parsed = parseMetaDraft(form.metaDraft);
    if (!parsed.ok) return { ok: false, error: parsed.error };
    body.edited_meta = parsed.meta;
  }
  return { ok: true, body };
}

/** Queue navigation helper: the id to jump to after acting on `currentId`. */
export function nextSampleId(ids: string[], currentId: string | null, step = 1): string | null {
  if (ids.length === 0) return null;
  if (currentId === null) return ids[0] ?? null;
  const index = ids.indexOf(currentId);
  if (index < 0) return ids[0] ?? null;
  const next = index + step;
  if (next < 0 || next >= ids.length) return null;
  return ids[next] ?? null;
}
