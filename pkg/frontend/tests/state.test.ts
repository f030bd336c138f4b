import { describe, expect, it } from "vitest";

import {
  buildDecision,
  canSubmit,
  checklistComplete,
  emptyForm,
  impliedVerdict,
  nextSampleId,
  parseMetaDraft,
  suggestedFlagReason,
} from "../src/state.js";

function answeredForm(values: [boolean, boolean, boolean]) {
  const form = emptyForm();
  form.checklist.answers_match = values[0];
  form.checklist.scoring_points_reasonable = values[1];
  form.checklist.nontrivial_visual_reasoning = values[2];
  return form;
}

const VALID_META = {
  sample_id: "q1",
  scoring_points: { p1: "a", p2: "b" },
  point_values: { p1: 1, p2: 2 },
  total_answer: 1,
  answer_summary: { "1": "42" },
  max_score: 3,
  verified: false,
};

describe("checklist gating", () => {
  it("fresh form cannot submit: every item must be answered", () => {
    const form = emptyForm();
    expect(checklistComplete(form)).toBe(false);
    expect(canSubmit(form)).toBe(false);
  });

  it("partially answered form still cannot submit", () => {
    const form = emptyForm();
    form.checklist.answers_match = true;
    form.checklist.scoring_points_reasonable = true;
    expect(canSubmit(form)).toBe(false);
  });

  it("all-yes form submits as approved", () => {
    const form = answeredForm([true, true, true]);
    expect(canSubmit(form)).toBe(true);
    expect(impliedVerdict(form)).toBe("approved");
  });

  it("any failed item forces a flag and requires a reason", () => {
    const form = answeredForm([true, true, false]);
    expect(impliedVerdict(form)).toBe("flagged");
    expect(canSubmit(form)).toBe(false); // reason missing: submit stays disabled
    form.flagReason = "trivial_visual_reasoning";
    expect(canSubmit(form)).toBe(true);
  });

  it("suggests a reason matching the failed item", () => {
    expect(suggestedFlagReason(answeredForm([false, true, true]))).toBe("answer_mismatch");
    expect(suggestedFlagReason(answeredForm([true, false, true]))).toBe("bad_scoring_points");
    expect(suggestedFlagReason(answeredForm([true, true, false]))).toBe("trivial_visual_reasoning");
    expect(suggestedFlagReason(answeredForm([true, true, true]))).toBeNull();
  });
});

describe("decision building", () => {
  it("carries revision + 1 for the optimistic check", () => {
    const built = buildDecision(answeredForm([true, true, true]), "alice", 3);
    expect(built).toEqual({
      ok: true,
      body: { reviewer_id: "alice", verdict: "approved", revision: 4 },
    });
  });

  it("flagged decisions include reason and trimmed note", () => {
    const form = answeredForm([true, true, false]);
    form.flagReason = "trivial_visual_reasoning";
    form.flagNote = "  follows directly from the picture  ";
    const built = buildDecision(form, "bob", 0);
    expect(built.ok).toBe(true);
    if (built.ok) {
      expect(built.body.verdict).toBe("flagged");
      expect(built.body.flag_reason).toBe("trivial_visual_reasoning");
      expect(built.body.flag_note).toBe("follows directly from the picture");
      expect(built.body.revision).toBe(1);
    }
  });

  it("requires a reviewer id", () => {
    const built = buildDecision(answeredForm([true, true, true]), "   ", 0);
    expect(built.ok).toBe(false);
  });

  it("attaches a parsed rubric edit", () => {
    const form = answeredForm([true, true, true]);
    form.metaDraft = JSON.stringify(VALID_META);
    const built = buildDecision(form, "carol", 1);
    expect(built.ok).toBe(true);
    if (built.ok) {
      expect(built.body.edited_meta?.max_score).toBe(3);
    }
  });

  it("rejects an inconsistent rubric edit", () => {
    const form = answeredForm([true, true, true]);
    form.metaDraft = JSON.stringify({ ...VALID_META, max_score: 99 });
    expect(canSubmit(form)).toBe(false);
    const built = buildDecision(form, "carol", 1);
    expect(built.ok).toBe(false);
  });
});

describe("rubric draft validation", () => {
  it("accepts a consistent rubric", () => {
    expect(parseMetaDraft(JSON.stringify(VALID_META)).ok).toBe(true);
  });

  it("rejects malformed JSON", () => {
    expect(parseMetaDraft("{nope").ok).toBe(false);
  });

  it("rejects mismatched point ids", () => {
    const bad = { ...VALID_META, point_values: { p1: 1, p9: 2 } };
    expect(parseMetaDraft(JSON.stringify(bad)).ok).toBe(false);
  });

  it("rejects non-positive point values", () => {
    const bad = { ...VALID_META, point_values: { p1: 0, p2: 3 } };
    expect(parseMetaDraft(JSON.stringify(bad)).ok).toBe(false);
  });

  it("rejects a max_score that is not the sum of values", () => {
    const bad = { ...VALID_META, max_score: 4 };
    const parsed = parseMetaDraft(JSON.stringify(bad));
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) expect(parsed.error).toContain("max_score");
  });

  it("rejects total_answer drift", () => {
    const bad = { ...VALID_META, total_answer: 2 };
    expect(parseMetaDraft(JSON.stringify(bad)).ok).toBe(false);
  });
});

describe("queue navigation", () => {
  const ids = ["a", "b", "c"];

  it("steps forward and backward", () => {
    expect(nextSampleId(ids, "a")).toBe("b");
    expect(nextSampleId(ids, "b", -1)).toBe("a");
  });

  it("returns null at the ends", () => {
    expect(nextSampleId(ids, "c")).toBeNull();
    expect(nextSampleId(ids, "a", -1)).toBeNull();
  });

  it("falls back to the first id", () => {
    expect(nextSampleId(ids, null)).toBe("a");
    expect(nextSampleId(ids, "ghost")).toBe("a");
    expect(nextSampleId([], null)).toBeNull();
  });
});
