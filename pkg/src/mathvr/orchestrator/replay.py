"""Trace auditing: re-execute recorded code blocks and diff the outcomes.

Figure bytes are allowed to differ; a block matches when its execution
status and figure count reproduce. A trace with no code blocks is vacuously
all-match.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

from mathvr.orchestrator.loop import ReasoningTrace
from mathvr.sandbox.pool import ExecRequest, RunnerPool


@dataclass(frozen=True)
class BlockReplay:
    block: int
    recorded_status: str
    replayed_status: str
    recorded_figures: int
    replayed_figures: int

    @property
    def match(self) -> bool:
        return (
            self.recorded_status == self.replayed_status
            and self.recorded_figures == self.replayed_figures
        )

    def to_json(self) -> dict:
        return {
            "block": self.block,
            "recorded_status": self.recorded_status,
            "replayed_status": self.replayed_status,
            "recorded_figures": self.recorded_figures,
            "replayed_figures": self.replayed_figures,
            "match": self.match,
        }


@dataclass
class ReplayReport:
    sample_id: str
    blocks: list[BlockReplay]

    @property
    def all_match(self) -> bool:
        return all(b.match for b in self.blocks)

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "all_match": self.all_match,
            "blocks": [b.to_json() for b in self.blocks],
        }


def replay(trace: ReasoningTrace, sandbox: RunnerPool, *, timeout: float = 20.0, dialect: str = "python") -> ReplayReport:
    blocks: list[BlockReplay] = []
    code_segments = trace.code_segments()
    scratch = Path(tempfile.mkdtemp(prefix="mathvr-replay-"))
    for i, segment in enumerate(code_segments):
        recorded = trace.exec_results[i]
        result = sandbox.execute(
            ExecRequest(
                code=segment.payload,
                figure_dir=scratch / f"block_{i:03d}",
                timeout=timeout,
                dialect=dialect,
            )
        )
        blocks.append(
            BlockReplay(
                block=i,
                recorded_status=recorded.status,
                replayed_status=result.status,
                recorded_figures=len(recorded.figures),
                replayed_figures=len(result.figures),
            )
        )
    return ReplayReport(sample_id=trace.sample_id, blocks=blocks)
