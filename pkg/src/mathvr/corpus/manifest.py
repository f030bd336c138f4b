"""Manifest and taxonomy file IO.

``manifest.jsonl`` layout: the first line is a header record
``{"version": ..., "taxonomy": ...}``; every following line is one sample
record (see :class:`mathvr.corpus.model.Sample`). UTF-8 throughout.
"""

from __future__ import annotations

import json
from pathlib import Path

from mathvr.corpus.model import CorpusManifest, Sample, Taxonomy, validate_sample
from mathvr.errors import DuplicateId, MissingAsset, SchemaError

MANIFEST_NAME = "manifest.jsonl"


def load_taxonomy(path: Path) -> Taxonomy:
    try:
        tree = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read taxonomy {path}: {exc}") from exc
    if not isinstance(tree, dict):
        raise SchemaError("taxonomy must be an object: root -> sub -> [points]")
    return Taxonomy(tree)


def load_manifest(root_dir: Path, check_assets: bool = True) -> CorpusManifest:
    """Parse and fully validate the manifest under ``root_dir``.

    Raises ``SchemaError`` for malformed records or failed sample invariants,
    ``DuplicateId`` for repeated sample ids, and ``MissingAsset`` (naming the
    path) for image files that do not exist, in that order of discovery.
    """
    root_dir = Path(root_dir)
    manifest_path = root_dir / MANIFEST_NAME
    if not manifest_path.is_file():
        raise SchemaError(f"no {MANIFEST_NAME} under {root_dir}")

    lines = manifest_path.read_text(encoding="utf-8").splitlines()
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append((lineno, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{MANIFEST_NAME}:{lineno}: invalid JSON: {exc}") from exc
    if not records:
        raise SchemaError(f"{MANIFEST_NAME} is empty")

    _, header = records[0]
    if not isinstance(header, dict) or "version" not in header:
        raise SchemaError(f"{MANIFEST_NAME}:1: first record must be a header with a version")
    version = str(header["version"])
    taxonomy_path = str(header.get("taxonomy", "taxonomy.json"))

    taxonomy = None
    if (root_dir / taxonomy_path).is_file():
        taxonomy = load_taxonomy(root_dir / taxonomy_path)

    samples: list[Sample] = []
    seen: set[str] = set()
    for lineno, record in records[1:]:
        sample = Sample.from_json(record)
        if sample.id in seen:
            raise DuplicateId(f"{MANIFEST_NAME}:{lineno}: duplicate sample id {sample.id!r}")
        seen.add(sample.id)
        violations = validate_sample(sample, taxonomy)
        if violations:
            detail = "; ".join(str(v) for v in violations)
            raise SchemaError(f"{MANIFEST_NAME}:{lineno}: sample {sample.id!r} invalid: {detail}")
        samples.append(sample)

    if check_assets:
        for sample in samples:
            for asset in sample.images():
                if not (root_dir / asset.path).is_file():
                    raise MissingAsset(f"sample {sample.id!r}: missing image file {asset.path}")

    return CorpusManifest(version=version, samples=samples, taxonomy_path=taxonomy_path)


def save_manifest(manifest: CorpusManifest, root_dir: Path) -> Path:
    """Write ``manifest.jsonl`` under ``root_dir``; returns the file path."""
    root_dir = Path(root_dir)
    root_dir.mkdir(parents=True, exist_ok=True)
    path = root_dir / MANIFEST_NAME
    with path.open("w", encoding="utf-8") as fh:
        header = {"version": manifest.version, "taxonomy": manifest.taxonomy_path}
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for sample in manifest.samples:
            fh.write(json.dumps(sample.to_json(), ensure_ascii=False) + "\n")
    return path
