"""Synthetic corpus and trace builders shared across the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from PIL import Image

from mathvr.corpus.manifest import save_manifest
from mathvr.corpus.model import CorpusManifest, ImageAsset, KnowledgeTag, QType, Sample
from mathvr.orchestrator.loop import ReasoningTrace, TokenUsage
from mathvr.orchestrator.segments import Segment
from mathvr.sandbox.pool import ExecResult

TAXONOMY_TREE = {
    "Geometry": {
        "Plane Geometry": ["Triangle", "Circle", "Quadrilateral", "Area & Perimeter"],
        "Solid Geometry": ["Prism", "Sphere"],
        "Analytic Geometry": ["Line", "Conic Sections"],
    },
    "Algebra": {
        "Functions": ["Quadratic Functions", "Exponential Functions"],
        "Equations": ["Linear Equations", "Inequalities"],
    },
    "Calculus": {"Differentiation": ["Tangents", "Extrema"], "Integration": ["Area Under Curve"]},
    "Statistics": {"Probability": ["Counting", "Distributions"], "Data Analysis": ["Charts"]},
}

_TAGS = [
    KnowledgeTag("Geometry", "Plane Geometry", "Triangle"),
    KnowledgeTag("Geometry", "Plane Geometry", "Circle"),
    KnowledgeTag("Geometry", "Solid Geometry", "Sphere"),
    KnowledgeTag("Algebra", "Functions", "Quadratic Functions"),
    KnowledgeTag("Calculus", "Differentiation", "Extrema"),
    KnowledgeTag("Statistics", "Probability", "Counting"),
]


def write_png(path: Path, width: int = 8, height: int = 8, color=(200, 30, 30)) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (width, height), color).save(path)
    return path


def make_sample(
    sample_id: str,
    *,
    subset: str = "multimodal",
    language: str = "en",
    n_question_images: int | None = None,
    n_solution_images: int = 1,
    qtype: QType = QType("single", "answer_based"),
    knowledge: KnowledgeTag | None = None,
    question_md: str | None = None,
    solution_md: str | None = None,
    image_dims: tuple[int, int] = (8, 8),
) -> Sample:
    if n_question_images is None:
        n_question_images = 1 if subset == "multimodal" else 0
    w, h = image_dims
    q_images = [
        ImageAsset(f"{sample_id}-q{i}", f"{sample_id}/q{i}.png", w, h, "question")
        for i in range(n_question_images)
    ]
    s_images = [
        ImageAsset(f"{sample_id}-s{i}", f"{sample_id}/s{i}.png", w, h, "solution")
        for i in range(n_solution_images)
    ]
    return Sample(
        id=sample_id,
        language=language,
        subset=subset,
        question_md=question_md or f"Find the area in problem {sample_id}.",
        solution_md=solution_md
        or f"Draw the figure. ![aux]({sample_id}/s0.png)\n\nTherefore, the answer is 6.",
        question_images=q_images,
        solution_images=s_images,
        qtype=qtype,
        knowledge=knowledge or _TAGS[0],
        benchmark_eligible=qtype.answer == "answer_based",
    )


def make_corpus(
    root: Path,
    n_text: int = 2,
    n_multimodal: int = 3,
    *,
    seed: int = 7,
    version: str = "1",
    with_assets: bool = True,
    qtype_mix: bool = False,
) -> CorpusManifest:
    """A valid on-disk corpus: manifest.jsonl, taxonomy.json, PNG assets.

    All samples are benchmark-eligible answer-based questions unless
    ``qtype_mix`` asks for occasional multiple-choice ones.
    """
    import json

    rng = random.Random(seed)
    samples = []
    for i in range(n_text + n_multimodal):
        subset = "text" if i < n_text else "multimodal"
        answer_kinds = (
            ["answer_based", "answer_based", "answer_based", "multiple_choice"]
            if qtype_mix
            else ["answer_based"]
        )
        sample = make_sample(
            f"q{i:04d}-en",
            subset=subset,
            knowledge=rng.choice(_TAGS),
            qtype=QType(rng.choice(["single", "multipart"]), rng.choice(answer_kinds)),
            question_md=f"Question {i}: compute the value. " + "word " * rng.randint(1, 30),
            solution_md=(
                f"Reasoning for {i}. ![fig](q{i:04d}-en/s0.png)\n\nTherefore, the answer is {i}."
            ),
            image_dims=(rng.randint(4, 64), rng.randint(4, 64)),
        )
        samples.append(sample)
    manifest = CorpusManifest(version=version, samples=samples, taxonomy_path="taxonomy.json")
    root = Path(root)
    save_manifest(manifest, root)
    (root / "taxonomy.json").write_text(json.dumps(TAXONOMY_TREE, ensure_ascii=False), encoding="utf-8")
    if with_assets:
        for sample in samples:
            for asset in sample.images():
                write_png(root / asset.path, asset.width, asset.height)
    return manifest


def make_trace(
    sample_id: str = "q0000-en",
    *,
    blocks: list[tuple[int, int]] = ((40, 1),),  # (code_tokens_hint, figures)
    text_words: int = 10,
    truncated: bool = False,
    model_id: str = "stub",
) -> ReasoningTrace:
    """Synthetic trace with the requested code blocks; token hints are word
    counts, so the approximate counter reproduces them exactly."""
    segments: list[Segment] = []
    exec_results: list[ExecResult] = []

    def add(kind: str, payload: str, origin: str) -> None:
        segments.append(Segment(kind, payload, origin, len(segments)))

    add("text", "t " * text_words if text_words else "", "model")
    for code_tokens, figures in blocks:
        add("code", "c " * code_tokens, "model")
        if figures < 0:  # failed block: error text injected, no figures
            exec_results.append(ExecResult(status="error", stderr="boom", duration=0.0))
            add("text", "boom", "sandbox")
            continue
        figs = [f"{sample_id}/fig_{i}.png" for i in range(figures)]
        exec_results.append(ExecResult(status="ok", figures=figs, duration=0.0))
        for f in figs:
            add("figure", f, "sandbox")
    if not truncated:
        add("final_answer", "Answer: 42", "model")
    segments = [Segment(s.kind, s.payload, s.origin, i) for i, s in enumerate(segments)]

    from mathvr.tokens import DEFAULT_COUNTER

    text_tokens = sum(
        DEFAULT_COUNTER.count(s.payload)
        for s in segments
        if s.kind in ("text", "final_answer") and s.origin == "model"
    )
    code_tokens = sum(DEFAULT_COUNTER.count(s.payload) for s in segments if s.kind == "code")
    n_figures = sum(1 for s in segments if s.kind == "figure")
    return ReasoningTrace(
        sample_id=sample_id,
        segments=segments,
        exec_results=exec_results,
        truncated=truncated,
        model_id=model_id,
        wall_time=0.0,
        token_usage=TokenUsage(text_tokens, code_tokens, n_figures),
    )
