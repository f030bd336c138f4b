"""Append-only trace persistence.

Run layout under an output root:
    traces/<run_id>.jsonl          one record per trace, append-only
    figures/<run_id>/<sample_id>/  block directories with PNG figures

Figure payloads inside a trace are paths relative to the run's figure root,
so a run directory can be moved wholesale.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from mathvr.orchestrator.loop import ReasoningTrace


class TraceStore:
    def __init__(self, out_root: Path, run_id: str):
        self.out_root = Path(out_root)
        self.run_id = run_id
        self.traces_path = self.out_root / "traces" / f"{run_id}.jsonl"
        self.figure_root = self.out_root / "figures" / run_id
        self.traces_path.parent.mkdir(parents=True, exist_ok=True)
        self.figure_root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, trace: ReasoningTrace) -> None:
        line = json.dumps(trace.to_json(), ensure_ascii=False)
        with self._lock, self.traces_path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def load_all(self) -> list[ReasoningTrace]:
        if not self.traces_path.is_file():
            return []
        out = []
        for line in self.traces_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(ReasoningTrace.from_json(json.loads(line)))
        return out

    def load(self, sample_id: str) -> ReasoningTrace | None:
        for trace in self.load_all():
            if trace.sample_id == sample_id:
                return trace
        return None

    @staticmethod
    def list_runs(out_root: Path) -> list[str]:
        traces_dir = Path(out_root) / "traces"
        if not traces_dir.is_dir():
            return []
        return sorted(p.stem for p in traces_dir.glob("*.jsonl"))
