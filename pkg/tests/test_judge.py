from __future__ import annotations

import json

import pytest

from factories import make_sample
from mathvr.clients import PlaybackClient, RecordingClient
from mathvr.errors import InconsistentVerdict, InvalidMeta, InvariantViolation, UnparseableVerdict
from mathvr.judge.config import JudgeConfig
from mathvr.judge.grading import ALL, GradeVerdict, grade
from mathvr.judge.jsonparse import parse_judge_json
from mathvr.judge.meta import JSON_ONLY_NUDGE, ReplyCache, SampleMeta, extract_meta, render_sample_text
from mathvr.judge.meta_store import MetaStore
from mathvr.judge.prompts import (
    GRADING_PLACEHOLDERS,
    GRADING_TEMPLATE,
    META_PLACEHOLDERS,
    META_TEMPLATE,
    fill_template,
    is_faithful_fill,
    literal_segments,
    load_template,
)

CFG = JudgeConfig()

# the worked rubric-extraction example shipped with the grading templates:
# six scoring points valued 1,2,1,1,2,1 (max 8), one summarized answer
REFERENCE_META_REPLY = {
    "id": 25006,
    "scoring_points": {
        "p1": "Recognize that AB is the diameter, thus angles ACB and ADB are right angles by the inscribed angle theorem.",
        "p2": "Apply the Pythagorean theorem to calculate BC in triangle ACB and BD in triangle ADB.",
        "p3": "Determine that triangle ABC is an isosceles right triangle to find angle BAC.",
        "p4": "Determine angle BAD in triangle ABD using calculated lengths.",
        "p5": "Classify the different configurations (AC and AD on the same or opposite sides of AB), and compute corresponding values for angle CAD.",
        "p6": "Combine stepwise results to conclude that the possible values for angle CAD are 15° or 75°.",
    },
    "scores": {"s1": 1, "s2": 2, "s3": 1, "s4": 1, "s5": 2, "s6": 1},
    "total_answer": 1,
    "answer_summary": {"1": "The possible values of angle CAD are 15° or 75°."},
    "max_score": 8,
}


def reference_meta(sample_id: str = "25006", verified: bool = True) -> SampleMeta:
    meta = SampleMeta(
        sample_id=sample_id,
        scoring_points=dict(REFERENCE_META_REPLY["scoring_points"]),
        point_values={"p1": 1, "p2": 2, "p3": 1, "p4": 1, "p5": 2, "p6": 1},
        total_answer=1,
        answer_summary=dict(REFERENCE_META_REPLY["answer_summary"]),
        max_score=8,
        verified=verified,
    )
    meta.validate()
    return meta


class TestParseJudgeJson:
    def test_fenced_json_inside_prose(self):
        reply = 'Sure! Here is the grading:\n```json\n{"a": 1}\n```\nHope that helps.'
        assert parse_judge_json(reply) == {"a": 1}

    def test_first_schema_valid_object_wins(self):
        schema = {"type": "object", "required": ["choice"]}
        reply = '{"noise": true} and then {"choice": "A"}'
        assert parse_judge_json(reply, schema) == {"choice": "A"}

    def test_no_braces_raises(self):
        with pytest.raises(UnparseableVerdict):
            parse_judge_json("no json here at all")

    def test_nested_braces_survive(self):
        reply = 'verdict: {"scores": {"p1": 1, "p2": {"x": 2}}, "ok": true}'
        assert parse_judge_json(reply)["scores"]["p2"] == {"x": 2}


class TestTemplates:
    def test_assets_contain_only_declared_placeholders(self):
        import re

        for name, declared in ((META_TEMPLATE, META_PLACEHOLDERS), (GRADING_TEMPLATE, GRADING_PLACEHOLDERS)):
            template = load_template(name)
            for key in declared:
                assert template.count("{" + key + "}") == 1, f"{name} must declare {{{key}}} exactly once"
            # no *other* single-word brace span collides with a placeholder-looking token
            spans = set(re.findall(r"\{([a-z_]+)\}", template))
            assert spans == set(declared)

    def test_fill_replaces_only_placeholder_spans(self):
        template = load_template(META_TEMPLATE)
        filled = fill_template(template, {"idd": "q7", "question": "QQQ"}, META_PLACEHOLDERS)
        assert "q7" in filled and "QQQ" in filled
        assert "{idd}" not in filled and "{question}" not in filled
        # every literal byte of the template survives
        assert is_faithful_fill(template, filled, META_PLACEHOLDERS)
        literals = literal_segments(template, META_PLACEHOLDERS)
        assert sum(len(seg) for seg in literals) + len("q7") + len("QQQ") == len(filled)

    def test_meta_prompt_sent_byte_equals_template_outside_placeholders(self):
        sample = make_sample("q1-en")
        judge = RecordingClient(PlaybackClient([json.dumps(REFERENCE_META_REPLY)]))
        extract_meta(sample, judge, CFG)
        sent = judge.calls[0][-1].parts[0].text
        template = load_template(META_TEMPLATE)
        expected = fill_template(
            template,
            {"idd": sample.id, "question": render_sample_text(sample)},
            META_PLACEHOLDERS,
        )
        assert sent == expected
        assert is_faithful_fill(template, sent, META_PLACEHOLDERS)

    def test_grading_prompt_sent_byte_equals_template_outside_placeholders(self):
        sample = make_sample("25006", subset="text", n_question_images=0)
        meta = reference_meta()
        reply = {"id": "25006", "is_fully_correct": True, "awarded_points": ["all"], "final_score": 8}
        judge = RecordingClient(PlaybackClient([json.dumps(reply)]))
        grade(sample, meta, "The answer is 15° or 75°.", judge, CFG)
        sent = judge.calls[0][-1].parts[0].text
        template = load_template(GRADING_TEMPLATE)
        expected = fill_template(
            template,
            {
                "question": sample.question_md,
                "question_id": sample.id,
                "model_response": "The answer is 15° or 75°.",
                "correct_answer": json.dumps(meta.answer_summary, ensure_ascii=False),
                "max_score": "8",
                "scoring_points": json.dumps(meta.scoring_points, ensure_ascii=False),
                "point_values": json.dumps(meta.point_values, ensure_ascii=False),
            },
            GRADING_PLACEHOLDERS,
        )
        assert sent == expected
        assert is_faithful_fill(template, sent, GRADING_PLACEHOLDERS)


class TestExtractMeta:
    def test_reference_reply_parses_into_rubric(self):
        sample = make_sample("25006")
        judge = PlaybackClient([json.dumps(REFERENCE_META_REPLY)])
        meta = extract_meta(sample, judge, CFG)
        assert len(meta.scoring_points) == 6
        assert meta.point_values == {"p1": 1, "p2": 2, "p3": 1, "p4": 1, "p5": 2, "p6": 1}
        assert meta.max_score == 8
        assert meta.total_answer == 1
        assert "15° or 75°" in meta.answer_summary["1"]
        assert meta.verified is False

    def test_minimal_meta(self):
        reply = {"scoring_points": {"p1": "solve"}, "scores": {"s1": 1}, "total_answer": 1,
                 "answer_summary": {"1": "2"}}
        meta = extract_meta(make_sample("m-en"), PlaybackClient([json.dumps(reply)]), CFG)
        assert meta.max_score == 1

    def test_declared_max_score_mismatch_surfaces(self):
        reply = dict(REFERENCE_META_REPLY, max_score=9)
        judge = PlaybackClient([json.dumps(reply)])
        with pytest.raises(InvariantViolation, match="max_score 9"):
            extract_meta(make_sample("25006"), judge, CFG)

    def test_zero_point_value_surfaces(self):
        reply = {"scoring_points": {"p1": "x"}, "scores": {"s1": 0}, "total_answer": 1,
                 "answer_summary": {"1": "y"}, "max_score": 0}
        with pytest.raises(InvariantViolation):
            extract_meta(make_sample("m-en"), PlaybackClient([json.dumps(reply)]), CFG)

    def test_scores_keyed_by_point_ids_accepted(self):
        reply = {"scoring_points": {"p1": "x", "p2": "y"}, "scores": {"p1": 1, "p2": 2},
                 "total_answer": 1, "answer_summary": {"1": "z"}}
        meta = extract_meta(make_sample("m-en"), PlaybackClient([json.dumps(reply)]), CFG)
        assert meta.point_values == {"p1": 1, "p2": 2}

    def test_json_repair_retries_exactly_then_raises(self):
        cfg = JudgeConfig(max_json_repair_retries=2)
        inner = PlaybackClient(["garbage", "more garbage", "still garbage"])
        judge = RecordingClient(inner)
        with pytest.raises(UnparseableVerdict):
            extract_meta(make_sample("m-en"), judge, cfg)
        assert len(judge.calls) == 3  # initial ask + exactly 2 re-asks
        assert judge.calls[1][-1].text_content() == JSON_ONLY_NUDGE
        assert judge.calls[2][-1].text_content() == JSON_ONLY_NUDGE

    def test_repair_can_recover(self):
        cfg = JudgeConfig(max_json_repair_retries=1)
        judge = PlaybackClient(["not json", json.dumps(REFERENCE_META_REPLY)])
        meta = extract_meta(make_sample("25006"), judge, cfg)
        assert meta.max_score == 8

    def test_reply_cache_makes_reruns_idempotent(self, tmp_path):
        cache = ReplyCache(tmp_path / "cache")
        sample = make_sample("25006")
        judge = RecordingClient(PlaybackClient([json.dumps(REFERENCE_META_REPLY)]))
        first = extract_meta(sample, judge, CFG, cache=cache)
        second = extract_meta(sample, judge, CFG, cache=cache)  # playback exhausted: must hit cache
        assert first == second
        assert len(judge.calls) == 1


class TestGrade:
    def _judge(self, reply: dict) -> PlaybackClient:
        return PlaybackClient([json.dumps(reply)])

    def test_fully_correct_awards_all(self):
        verdict = grade(
            make_sample("25006", subset="text", n_question_images=0),
            reference_meta(),
            "So angle CAD is 15° or 75°.",
            self._judge({"id": "25006", "is_fully_correct": True, "awarded_points": ["all"], "final_score": 8}),
            CFG,
        )
        assert verdict.is_fully_correct and verdict.all_awarded
        assert verdict.final_score == 8

    def test_partial_award_sums_values(self):
        meta = SampleMeta(
            sample_id="m1",
            scoring_points={"p1": "a", "p2": "b", "p3": "c"},
            point_values={"p1": 1, "p2": 2, "p3": 1},
            total_answer=1,
            answer_summary={"1": "x"},
            max_score=4,
            verified=True,
        )
        verdict = grade(
            make_sample("m1", subset="text", n_question_images=0),
            meta,
            "partial work",
            self._judge({"id": "m1", "is_fully_correct": False, "awarded_points": ["p1", "p3"], "final_score": 2}),
            CFG,
        )
        assert verdict.final_score == 2
        assert verdict.awarded_points == ("p1", "p3")

    def test_empty_award_scores_zero(self):
        verdict = grade(
            make_sample("25006", subset="text", n_question_images=0),
            reference_meta(),
            "nothing useful",
            self._judge({"id": "25006", "is_fully_correct": False, "awarded_points": [], "final_score": 0}),
            CFG,
        )
        assert verdict.final_score == 0 and verdict.awarded_points == ()

    def test_inconsistent_flag_gets_one_reask_then_raises(self):
        bad = {"id": "x", "is_fully_correct": True, "awarded_points": ["p1"], "final_score": 1}
        inner = PlaybackClient([json.dumps(bad), json.dumps(bad)])
        judge = RecordingClient(inner)
        with pytest.raises(InconsistentVerdict):
            grade(
                make_sample("25006", subset="text", n_question_images=0),
                reference_meta(),
                "resp",
                judge,
                CFG,
            )
        assert len(judge.calls) == 2  # original + exactly one re-ask

    def test_reask_can_fix_inconsistency(self):
        bad = {"id": "x", "is_fully_correct": True, "awarded_points": ["p1"], "final_score": 1}
        good = {"id": "x", "is_fully_correct": False, "awarded_points": ["p1"], "final_score": 1}
        judge = PlaybackClient([json.dumps(bad), json.dumps(good)])
        verdict = grade(
            make_sample("25006", subset="text", n_question_images=0),
            reference_meta(),
            "resp",
            judge,
            CFG,
        )
        assert verdict.final_score == 1 and not verdict.is_fully_correct

    def test_unverified_meta_refused_unless_allowed(self):
        meta = reference_meta(verified=False)
        judge = self._judge({"id": "x", "is_fully_correct": False, "awarded_points": [], "final_score": 0})
        with pytest.raises(InvalidMeta):
            grade(make_sample("25006", subset="text", n_question_images=0), meta, "r", judge, CFG)
        verdict = grade(
            make_sample("25006", subset="text", n_question_images=0),
            meta, "r", judge, CFG, allow_unverified=True,
        )
        assert verdict.final_score == 0

    def test_question_images_attached_for_multimodal(self, tmp_path):
        from factories import write_png

        sample = make_sample("mm-en", subset="multimodal")
        for asset in sample.images():
            write_png(tmp_path / asset.path)
        judge = RecordingClient(
            self._judge({"id": "mm-en", "is_fully_correct": False, "awarded_points": [], "final_score": 0})
        )
        grade(sample, reference_meta("mm-en"), "resp", judge, CFG, corpus_root=tmp_path)
        parts = judge.calls[0][-1].parts
        from mathvr.clients import ImagePart

        assert any(isinstance(p, ImagePart) for p in parts)


def test_verdict_round_trips_through_json():
    verdict = GradeVerdict("s", True, ALL, 8, raw_judge_reply="{}")
    again = GradeVerdict.from_json(verdict.to_json())
    assert again.all_awarded and again.final_score == 8
    partial = GradeVerdict("s", False, ("p1",), 1)
    assert GradeVerdict.from_json(partial.to_json()).awarded_points == ("p1",)


def test_meta_store_round_trip(tmp_path):
    store = MetaStore(tmp_path / "meta")
    meta = reference_meta()
    store.save(meta)
    assert store.exists("25006")
    assert store.load("25006") == meta
    assert store.ids() == ["25006"]
