"""On-disk rubric store: one ``meta/<sample_id>.json`` per sample."""

from __future__ import annotations

import json
from pathlib import Path

from mathvr.judge.meta import SampleMeta


class MetaStore:
    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, sample_id: str) -> Path:
        return self.directory / f"{sample_id}.json"

    def save(self, meta: SampleMeta) -> Path:
        path = self._path(meta.sample_id)
        path.write_text(json.dumps(meta.to_json(), ensure_ascii=False, indent=2), encoding="utf-8")
        return path

    def load(self, sample_id: str) -> SampleMeta:
        return SampleMeta.from_json(json.loads(self._path(sample_id).read_text(encoding="utf-8")))

    def exists(self, sample_id: str) -> bool:
        return self._path(sample_id).is_file()

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))
