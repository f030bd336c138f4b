from mathvr.judge.config import JudgeConfig
from mathvr.judge.jsonparse import parse_judge_json
from mathvr.judge.meta import SampleMeta, extract_meta
from mathvr.judge.grading import (
    ALL,
    GradeVerdict,
    QuestionScore,
    grade,
    compute_ac,
    compute_ps,
)
from mathvr.judge.meta_store import MetaStore

__all__ = [
    "JudgeConfig",
    "parse_judge_json",
    "SampleMeta",
    "extract_meta",
    "ALL",
    "GradeVerdict",
    "QuestionScore",
    "grade",
    "compute_ac",
    "compute_ps",
    "MetaStore",
]
