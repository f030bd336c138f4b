"""Benchmark report aggregation.

Per-question scores roll up into the leaderboard shape: per-subset
(text/multimodal) and overall PS mean plus AC rate, with a per-domain
breakdown. The overall row is the unweighted mean over questions, which
equals the subset-size-weighted mean of subset means; that identity is a
machine-checked invariant of every report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from mathvr.analytics.costs import CostStats
from mathvr.corpus.model import CorpusManifest
from mathvr.errors import EmptyInput, UnknownSample
from mathvr.judge.grading import QuestionScore


@dataclass(frozen=True)
class SubsetAggregate:
    ps_mean: float
    ac_rate_percent: float
    n: int

    def to_json(self) -> dict:
        return {"ps_mean": self.ps_mean, "ac_rate_percent": self.ac_rate_percent, "n": self.n}


@dataclass
class BenchmarkReport:
    model_id: str
    per_subset: dict[str, SubsetAggregate]
    overall: SubsetAggregate
    per_category: dict[str, SubsetAggregate]
    ungradeable: int
    cost: CostStats | None = None

    def check_invariants(self, tolerance: float = 1e-9) -> None:
        """Overall must be the n-weighted mean of the subset rows."""
        n_total = sum(agg.n for agg in self.per_subset.values())
        if self.overall.n != n_total:
            raise AssertionError(f"overall n {self.overall.n} != subset sum {n_total}")
        if n_total == 0:
            return
        for attr in ("ps_mean", "ac_rate_percent"):
            weighted = (
                sum(getattr(agg, attr) * agg.n for agg in self.per_subset.values()) / n_total
            )
            actual = getattr(self.overall, attr)
            if abs(weighted - actual) > tolerance:
                raise AssertionError(f"overall {attr} {actual} != weighted subset mean {weighted}")

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "per_subset": {k: v.to_json() for k, v in self.per_subset.items()},
            "overall": self.overall.to_json(),
            "per_category": {k: v.to_json() for k, v in self.per_category.items()},
            "ungradeable": self.ungradeable,
            "cost": self.cost.to_json() if self.cost else None,
        }


def _aggregate(scores: list[QuestionScore]) -> SubsetAggregate:
    n = len(scores)
    if n == 0:
        return SubsetAggregate(ps_mean=0.0, ac_rate_percent=0.0, n=0)
    return SubsetAggregate(
        ps_mean=sum(s.ps for s in scores) / n,
        ac_rate_percent=100.0 * sum(s.ac for s in scores) / n,
        n=n,
    )


def weighted_mean(cells: list[tuple[float, int]]) -> float:
    """n-weighted mean of (value, n) cells; how overall rows reconstruct."""
    total = sum(n for _, n in cells)
    if total == 0:
        raise EmptyInput("weighted mean over zero items")
    return sum(value * n for value, n in cells) / total


def aggregate_report(
    scores: list[QuestionScore],
    samples: CorpusManifest,
    costs: CostStats | None,
    model_id: str,
    *,
    ungradeable: int = 0,
) -> BenchmarkReport:
    """Roll per-question scores up into a report; raises ``UnknownSample``."""
    by_id = {s.id: s for s in samples.samples}
    by_subset: dict[str, list[QuestionScore]] = {"text": [], "multimodal": []}
    by_category: dict[str, list[QuestionScore]] = {}
    for score in scores:
        sample = by_id.get(score.sample_id)
        if sample is None:
            raise UnknownSample(f"score references unknown sample {score.sample_id!r}")
        by_subset[sample.subset].append(score)
        root = sample.knowledge.root if sample.knowledge else "Uncategorized"
        by_category.setdefault(root, []).append(score)

    report = BenchmarkReport(
        model_id=model_id,
        per_subset={k: _aggregate(v) for k, v in by_subset.items()},
        overall=_aggregate(scores),
        per_category={k: _aggregate(v) for k, v in sorted(by_category.items())},
        ungradeable=ungradeable,
        cost=costs,
    )
    report.check_invariants()
    return report


def render_markdown(report: BenchmarkReport) -> str:
    """A leaderboard-style table with one-decimal rounding."""

    def row(name: str, agg: SubsetAggregate) -> str:
        return f"| {name} | {agg.ps_mean:.1f} | {agg.ac_rate_percent:.1f} | {agg.n} |"

    lines = [
        f"# Benchmark report: {report.model_id}",
        "",
        "| Split | PS | AC | n |",
        "|---|---|---|---|",
        row("Text", report.per_subset.get("text", SubsetAggregate(0.0, 0.0, 0))),
        row("Multimodal", report.per_subset.get("multimodal", SubsetAggregate(0.0, 0.0, 0))),
        row("Overall", report.overall),
        "",
        "| Category | PS | AC | n |",
        "|---|---|---|---|",
    ]
    for name, agg in report.per_category.items():
        lines.append(row(name, agg))
    lines.append("")
    lines.append(f"Ungradeable responses excluded from aggregates: {report.ungradeable}")
    if report.cost:
        c = report.cost
        lines.extend(
            [
                "",
                "## Output cost",
                f"- avg text tokens/problem: {c.avg_text_tokens:.1f}",
                f"- avg code tokens/rendered image: {c.avg_code_tokens_per_image:.1f}",
                f"- avg images/problem: {c.avg_images_per_problem:.2f}",
                f"- total rendered images: {c.total_images}",
                f"- avg total output tokens/problem: {c.avg_total_output_tokens:.1f}",
            ]
        )
    return "\n".join(lines) + "\n"


def write_report(report: BenchmarkReport, out_dir: Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    md_path = out_dir / "report.md"
    json_path.write_text(json.dumps(report.to_json(), ensure_ascii=False, indent=2), encoding="utf-8")
    md_path.write_text(render_markdown(report), encoding="utf-8")
    return json_path, md_path
