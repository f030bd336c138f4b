"""Review workflow state: an append-only decision log plus derived statuses.

Every decision is one JSONL record in ``reviews.jsonl``; replaying the log
reconstructs the current queue exactly, so the file is the single source of
truth and prior revisions stay readable forever. Writers are serialized
through one lock; readers work on immutable snapshots. Races between two
reviewers resolve via an optimistic revision check: a submission must carry
current revision + 1.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from mathvr.corpus.model import CorpusManifest, Sample
from mathvr.errors import InvalidMeta, InvariantViolation, RevisionConflict, UnknownSample
from mathvr.judge.meta import SampleMeta

FLAG_REASONS = ("trivial_visual_reasoning", "answer_mismatch", "bad_scoring_points", "other")
STATUSES = ("pending", "approved", "flagged")


@dataclass
class ReviewDecision:
    sample_id: str
    reviewer_id: str
    verdict: str  # "approved" | "flagged"
    revision: int
    flag_reason: str | None = None
    flag_note: str = ""
    edited_meta: SampleMeta | None = None
    decided_at: str = ""

    def validate(self) -> None:
        if self.verdict not in ("approved", "flagged"):
            raise ValueError(f"verdict must be approved|flagged, got {self.verdict!r}")
        if self.verdict == "flagged" and self.flag_reason not in FLAG_REASONS:
            raise ValueError(f"flagged decisions need a flag_reason from {FLAG_REASONS}")
        if self.edited_meta is not None:
            try:
                self.edited_meta.validate()
            except InvariantViolation as exc:
                raise InvalidMeta(str(exc)) from exc

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "reviewer_id": self.reviewer_id,
            "verdict": self.verdict,
            "revision": self.revision,
            "flag_reason": self.flag_reason,
            "flag_note": self.flag_note,
            "edited_meta": self.edited_meta.to_json() if self.edited_meta else None,
            "decided_at": self.decided_at,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ReviewDecision":
        edited = obj.get("edited_meta")
        return cls(
            sample_id=str(obj["sample_id"]),
            reviewer_id=str(obj["reviewer_id"]),
            verdict=str(obj["verdict"]),
            revision=int(obj["revision"]),
            flag_reason=obj.get("flag_reason"),
            flag_note=str(obj.get("flag_note", "")),
            edited_meta=SampleMeta.from_json(edited) if edited else None,
            decided_at=str(obj.get("decided_at", "")),
        )


@dataclass
class ReviewQueueItem:
    sample: Sample
    meta: SampleMeta | None
    status: str  # latest decision, or "pending"

    def to_json(self) -> dict:
        return {
            "sample": self.sample.to_json(),
            "meta": self.meta.to_json() if self.meta else None,
            "status": self.status,
        }


@dataclass
class _SampleState:
    revision: int = 0
    status: str = "pending"
    edited_meta: SampleMeta | None = None
    history: list[ReviewDecision] = field(default_factory=list)


class ReviewLog:
    def __init__(self, path: Path, known_ids: set[str]):
        self.path = Path(path)
        self.known_ids = set(known_ids)
        self._lock = threading.Lock()
        self._state: dict[str, _SampleState] = {}
        if self.path.is_file():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(ReviewDecision.from_json(json.loads(line)))

    def _apply(self, decision: ReviewDecision) -> None:
        state = self._state.setdefault(decision.sample_id, _SampleState())
        state.revision = decision.revision
        state.status = decision.verdict
        if decision.edited_meta is not None:
            state.edited_meta = decision.edited_meta.with_verified(True)
        state.history.append(decision)

    def submit(self, decision: ReviewDecision) -> int:
        """Append one decision; returns the stored revision.

        Raises ``UnknownSample`` for ids outside the corpus,
        ``RevisionConflict`` when the optimistic check fails, and
        ``InvalidMeta``/``ValueError`` for malformed decisions.
        """
        if decision.sample_id not in self.known_ids:
            raise UnknownSample(f"no sample {decision.sample_id!r} in the corpus under review")
        decision.validate()
        with self._lock:
            current = self._state.get(decision.sample_id, _SampleState()).revision
            if decision.revision != current + 1:
                raise RevisionConflict(
                    f"{decision.sample_id}: submitted revision {decision.revision}, current is {current}"
                )
            if not decision.decided_at:
                decision.decided_at = datetime.now(timezone.utc).isoformat()
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(decision.to_json(), ensure_ascii=False) + "\n")
            self._apply(decision)
            return decision.revision

    def status(self, sample_id: str) -> str:
        return self._state.get(sample_id, _SampleState()).status

    def revision(self, sample_id: str) -> int:
        return self._state.get(sample_id, _SampleState()).revision

    def edited_meta(self, sample_id: str) -> SampleMeta | None:
        return self._state.get(sample_id, _SampleState()).edited_meta

    def history(self, sample_id: str) -> list[ReviewDecision]:
        return list(self._state.get(sample_id, _SampleState()).history)


def list_queue(
    manifest: CorpusManifest,
    log: ReviewLog,
    metas: dict[str, SampleMeta],
    status_filter: str | None = None,
    page: int = 0,
    page_size: int = 50,
) -> tuple[list[ReviewQueueItem], int]:
    """Stable id-ordered queue page; returns (items, total matching)."""
    items = []
    for sample in sorted(manifest.samples, key=lambda s: s.id):
        status = log.status(sample.id)
        if status_filter and status != status_filter:
            continue
        meta = log.edited_meta(sample.id) or metas.get(sample.id)
        items.append(ReviewQueueItem(sample=sample, meta=meta, status=status))
    total = len(items)
    start = page * page_size
    return items[start : start + page_size], total


def export_benchmark(manifest: CorpusManifest, log: ReviewLog) -> CorpusManifest:
    """Approved, benchmark-eligible samples only (no proofs, no flagged).

    Idempotent for a fixed log; an export with nothing approved is legal but
    logged as a warning.
    """
    import logging

    kept = [
        s
        for s in manifest.samples
        if log.status(s.id) == "approved" and s.benchmark_eligible and s.qtype.answer != "proof_based"
    ]
    if not kept:
        logging.getLogger(__name__).warning("benchmark export is empty: nothing approved yet")
    return CorpusManifest(version=manifest.version, samples=kept, taxonomy_path=manifest.taxonomy_path)
