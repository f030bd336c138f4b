"""Converter fidelity tournament.

Each item pits several image-to-code converters against one source figure:
every candidate's code is executed (feeding the per-converter execution
success rate), and a judge picks the rendered reconstruction closest to the
original in a forced choice. Presentation order is shuffled per item with a
run-level seed to neutralize position bias. Items where a single candidate
renders default to that converter; items where none renders are skipped and
counted.
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from mathvr.clients import ChatClient, ChatMessage, ImagePart, TextPart
from mathvr.errors import EmptyInput, UnparseableVerdict
from mathvr.judge.jsonparse import parse_judge_json
from mathvr.orchestrator.figures import image_file_b64
from mathvr.sandbox.pool import ExecRequest, RunnerPool

CHOICE_PROMPT = """\
The first image is an original mathematical figure. The following {count} images, labeled
{labels}, are programmatic reconstructions of it. Decide which reconstruction is most
similar to the original figure, considering geometric structure, labels and proportions
rather than style or color.

Reply with JSON only: {{"choice": "<label>"}}"""

CHOICE_SCHEMA = {"type": "object", "required": ["choice"], "properties": {"choice": {"type": "string"}}}


@dataclass
class FidelityItem:
    item_id: str
    original_image: Path
    candidates: dict[str, str]  # converter_id -> code


@dataclass(frozen=True)
class ConverterOutcome:
    exec_success: Fraction
    preferred_count: int

    def to_json(self) -> dict:
        return {
            "exec_success": float(self.exec_success),
            "exec_success_exact": f"{self.exec_success.numerator}/{self.exec_success.denominator}",
            "preferred_count": self.preferred_count,
        }


@dataclass
class FidelityReport:
    per_converter: dict[str, ConverterOutcome]
    n_items: int
    skipped: int
    defaulted: int
    abstained: int
    seed: int

    def to_json(self) -> dict:
        return {
            "per_converter": {k: v.to_json() for k, v in sorted(self.per_converter.items())},
            "n_items": self.n_items,
            "skipped": self.skipped,
            "defaulted": self.defaulted,
            "abstained": self.abstained,
            "seed": self.seed,
        }


def fidelity_tournament(
    items: list[FidelityItem],
    sandbox: RunnerPool,
    judge: ChatClient,
    *,
    seed: int,
    work_dir: Path,
    timeout: float = 20.0,
    dialect: str = "python",
) -> FidelityReport:
    if not items:
        raise EmptyInput("tournament needs at least one item")
    for item in items:
        if len(item.candidates) < 2:
            raise ValueError(f"item {item.item_id}: a tournament needs at least 2 converters")

    work_dir = Path(work_dir)
    attempts: dict[str, int] = {}
    successes: dict[str, int] = {}
    preferred: dict[str, int] = {}
    skipped = defaulted = abstained = 0

    for item in items:
        rendered: dict[str, Path] = {}
        for converter_id in sorted(item.candidates):
            attempts[converter_id] = attempts.get(converter_id, 0) + 1
            figure_dir = work_dir / item.item_id / converter_id
            result = sandbox.execute(
                ExecRequest(
                    code=item.candidates[converter_id],
                    figure_dir=figure_dir,
                    timeout=timeout,
                    dialect=dialect,
                )
            )
            if result.status == "ok" and result.figures:
                successes[converter_id] = successes.get(converter_id, 0) + 1
                rendered[converter_id] = Path(result.figures[0])
            elif result.status == "ok":
                successes[converter_id] = successes.get(converter_id, 0) + 1  # ran, drew nothing

        drawable = {c: p for c, p in rendered.items()}
        if not drawable:
            skipped += 1
            continue
        if len(drawable) == 1:
            only = next(iter(drawable))
            preferred[only] = preferred.get(only, 0) + 1
            defaulted += 1
            continue

        order = sorted(drawable)
        random.Random(f"{seed}:{item.item_id}").shuffle(order)
        labels = list(string.ascii_uppercase[: len(order)])
        prompt = CHOICE_PROMPT.format(count=len(order), labels=", ".join(labels))
        parts: list = [TextPart(prompt)]
        media, data = image_file_b64(item.original_image)
        parts.append(ImagePart(media_type=media, data_b64=data))
        for converter_id in order:
            media, data = image_file_b64(drawable[converter_id])
            parts.append(ImagePart(media_type=media, data_b64=data))

        reply = judge.complete([ChatMessage(role="user", parts=tuple(parts))])
        try:
            obj = parse_judge_json(reply.text, CHOICE_SCHEMA)
            choice = str(obj["choice"]).strip().upper()
            winner = order[labels.index(choice)]
        except (UnparseableVerdict, ValueError, IndexError):
            abstained += 1
            continue
        preferred[winner] = preferred.get(winner, 0) + 1

    per_converter = {
        converter_id: ConverterOutcome(
            exec_success=Fraction(successes.get(converter_id, 0), attempts[converter_id]),
            preferred_count=preferred.get(converter_id, 0),
        )
        for converter_id in sorted(attempts)
    }
    return FidelityReport(
        per_converter=per_converter,
        n_items=len(items),
        skipped=skipped,
        defaulted=defaulted,
        abstained=abstained,
        seed=seed,
    )


def load_items(path: Path) -> list[FidelityItem]:
    """Items manifest: JSONL of {item_id, original_image, candidates}."""
    base = Path(path).parent
    items = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        items.append(
            FidelityItem(
                item_id=str(obj["item_id"]),
                original_image=base / obj["original_image"],
                candidates={str(k): str(v) for k, v in obj["candidates"].items()},
            )
        )
    return items
