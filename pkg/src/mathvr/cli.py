"""Command-line entry point.

Subcommands map 1:1 onto the library surface: ``ingest`` and ``validate``
for corpora, ``run`` for the reasoning loop, ``grade`` and ``report`` for
the judge pipeline and aggregation, ``agree`` for inter-rater statistics,
``fidelity`` for converter tournaments, ``serve`` for the review service,
``replay`` for trace audits. Endpoints and keys come from the environment
or a config file only (see mathvr.config); playback files substitute for
live endpoints in offline runs.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from mathvr import __version__
from mathvr.analytics.agreement import (
    agreement_stats,
    load_rater_csv,
    paired_vectors,
    pearson,
    spearman,
)
from mathvr.analytics.aggregate import aggregate_report, write_report
from mathvr.analytics.costs import cost_stats
from mathvr.analytics.fidelity import fidelity_tournament, load_items
from mathvr.clients import HttpChatClient, HttpJudgeClient
from mathvr.config import resolve_endpoints
from mathvr.corpus.curation import RawImage, RawRecord, Rejected, curate_raw
from mathvr.corpus.manifest import load_manifest, save_manifest
from mathvr.corpus.model import CorpusManifest
from mathvr.errors import ConfigError, MathVRError
from mathvr.judge.config import JudgeConfig
from mathvr.judge.grading import compute_ps, grade
from mathvr.judge.meta import extract_meta
from mathvr.judge.meta_store import MetaStore
from mathvr.orchestrator.loop import OrchestratorConfig, run_problem
from mathvr.orchestrator.replay import replay as replay_trace
from mathvr.orchestrator.tracestore import TraceStore
from mathvr.playback import ScriptedJudge, ScriptedModel
from mathvr.sandbox.pool import RunnerPool
from mathvr.errors import UnparseableVerdict


def _fail(exc: Exception, code: int = 1) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    click.echo(json.dumps(payload), err=True)
    sys.exit(code)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Benchmark harness for visual math reasoning."""


@main.command()
@click.option("--raw", "raw_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--corpus-root", type=click.Path(path_type=Path), required=True)
@click.option("--judge-playback", type=click.Path(exists=True, path_type=Path), default=None,
              help="scripted curation replies instead of a live judge")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--version", "corpus_version", default="1")
def ingest(raw_path: Path, corpus_root: Path, judge_playback: Path | None, config_path: Path | None,
           corpus_version: str) -> None:
    """Curate raw records into a validated corpus manifest."""
    try:
        judge = _judge_client(judge_playback, config_path)
        samples = []
        rejects = []
        for line in raw_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            raw = RawRecord(
                id=str(obj["id"]),
                language=str(obj.get("language", "en")),
                question_text=str(obj["question_text"]),
                solution_text=str(obj["solution_text"]),
                question_images=[RawImage(**img) for img in obj.get("question_images", [])],
                solution_images=[RawImage(**img) for img in obj.get("solution_images", [])],
            )
            outcome = curate_raw(raw, judge)
            if isinstance(outcome, Rejected):
                rejects.append({"id": outcome.record_id, "reason": outcome.reason, "detail": outcome.detail})
            else:
                samples.append(outcome)
        corpus_root.mkdir(parents=True, exist_ok=True)
        save_manifest(CorpusManifest(version=corpus_version, samples=samples, taxonomy_path="taxonomy.json"),
                      corpus_root)
        rejects_path = corpus_root / "rejected.jsonl"
        with rejects_path.open("w", encoding="utf-8") as fh:
            for r in rejects:
                fh.write(json.dumps(r, ensure_ascii=False) + "\n")
        click.echo(f"ingested {len(samples)} samples, rejected {len(rejects)} (see {rejects_path})")
    except MathVRError as exc:
        _fail(exc)


@main.command()
@click.option("--corpus-root", type=click.Path(exists=True, path_type=Path), required=True)
def validate(corpus_root: Path) -> None:
    """Load and fully validate a corpus; exit nonzero on problems."""
    try:
        manifest = load_manifest(corpus_root)
    except MathVRError as exc:
        _fail(exc)
        return
    text = sum(1 for s in manifest.samples if s.subset == "text")
    click.echo(
        f"ok: {len(manifest.samples)} samples "
        f"({text} text, {len(manifest.samples) - text} multimodal), version {manifest.version}"
    )


@main.command()
@click.option("--corpus-root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_root", type=click.Path(path_type=Path), required=True)
@click.option("--subset", type=click.Choice(["text", "multimodal", "all"]), default="all")
@click.option("--lang", type=click.Choice(["en", "zh", "all"]), default="all")
@click.option("--parallelism", type=int, default=1)
@click.option("--seed", type=int, default=0)
@click.option("--run-id", default=None)
@click.option("--model-playback", type=click.Path(exists=True, path_type=Path), default=None,
              help="scripted model replies instead of a live endpoint")
@click.option("--model-id", default=None, help="model id sent to a live endpoint")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--max-code-rounds", type=int, default=8)
@click.option("--exec-timeout", type=float, default=20.0)
@click.option("--max-output-tokens", type=int, default=8192)
@click.option("--repair-attempts", type=int, default=1)
@click.option("--deterministic/--no-deterministic", default=None,
              help="zero wall times for byte-reproducible traces (default: on for playback)")
def run(corpus_root: Path, out_root: Path, subset: str, lang: str, parallelism: int, seed: int,
        run_id: str | None, model_playback: Path | None, model_id: str | None,
        config_path: Path | None, max_code_rounds: int, exec_timeout: float,
        max_output_tokens: int, repair_attempts: int, deterministic: bool | None) -> None:
    """Run the reasoning loop over a corpus and persist traces."""
    if parallelism < 1:
        _fail(ConfigError("parallelism must be >= 1"), code=2)
    try:
        manifest = load_manifest(corpus_root)
        samples = [
            s
            for s in manifest.samples
            if (subset == "all" or s.subset == subset) and (lang == "all" or s.language == lang)
        ]
        scripted = ScriptedModel.from_file(model_playback) if model_playback else None
        if scripted is None:
            model_cfg, _, _ = resolve_endpoints(config_path)
            if not model_cfg.configured:
                raise ConfigError("no model endpoint: set MATHVR_MODEL_URL or pass --model-playback")
        if deterministic is None:
            deterministic = scripted is not None
        run_id = run_id or f"run-{seed:08d}"
        cfg = OrchestratorConfig(
            max_code_rounds=max_code_rounds,
            per_exec_timeout=exec_timeout,
            max_output_tokens=max_output_tokens,
            repair_attempts_per_block=repair_attempts,
            deterministic_timing=deterministic,
        )
        store = TraceStore(out_root, run_id)

        with RunnerPool(workers=parallelism) as pool:

            def solve(sample):
                if scripted is not None:
                    client = scripted.for_sample(sample.id)
                else:
                    client = HttpChatClient(model_cfg.url, model_id or model_cfg.model_id or "model",
                                            model_cfg.key)
                return run_problem(sample, client, pool, cfg,
                                   figure_root=store.figure_root, corpus_root=corpus_root)

            with ThreadPoolExecutor(max_workers=parallelism) as pool_exec:
                traces = list(pool_exec.map(solve, samples))

        for trace in sorted(traces, key=lambda t: t.sample_id):  # deterministic file order
            store.append(trace)
        click.echo(f"wrote {len(traces)} traces to {store.traces_path}")
    except MathVRError as exc:
        _fail(exc, code=2 if isinstance(exc, ConfigError) else 1)


@main.command("grade")
@click.option("--corpus-root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--run-id", required=True)
@click.option("--judge-playback", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--judge-id", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--alpha", type=float, default=0.7)
@click.option("--require-verified-meta", is_flag=True, default=False,
              help="refuse to grade with rubrics the review workflow has not verified")
def grade_cmd(corpus_root: Path, out_root: Path, run_id: str, judge_playback: Path | None,
              judge_id: str | None, config_path: Path | None, alpha: float,
              require_verified_meta: bool) -> None:
    """Grade a run's traces: extract rubrics as needed, then score."""
    try:
        manifest = load_manifest(corpus_root)
        store = TraceStore(out_root, run_id)
        traces = store.load_all()
        if not traces:
            raise ConfigError(f"run {run_id} has no traces under {out_root}")
        judge = _judge_client(judge_playback, config_path, judge_id)
        jcfg = JudgeConfig(alpha=alpha, model_id=getattr(judge, "model_id", "judge"))
        meta_store = MetaStore(Path(corpus_root) / "meta")

        scores = []
        ungradeable = 0
        for trace in sorted(traces, key=lambda t: t.sample_id):
            sample = manifest.by_id(trace.sample_id)
            try:
                if meta_store.exists(sample.id):
                    meta = meta_store.load(sample.id)
                else:
                    meta = extract_meta(sample, judge, jcfg, corpus_root=corpus_root)
                    meta_store.save(meta)
                verdict = grade(
                    sample,
                    meta,
                    trace.rendered_response(),
                    judge,
                    jcfg,
                    allow_unverified=not require_verified_meta,
                    corpus_root=corpus_root,
                )
                scores.append(compute_ps(meta, verdict, jcfg))
            except (UnparseableVerdict, MathVRError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                ungradeable += 1
                click.echo(f"ungradeable {trace.sample_id}: {exc}", err=True)

        scores_dir = Path(out_root) / "scores"
        scores_dir.mkdir(parents=True, exist_ok=True)
        scores_path = scores_dir / f"{run_id}.jsonl"
        with scores_path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"run_id": run_id, "model_id": traces[0].model_id,
                                 "ungradeable": ungradeable}) + "\n")
            for score in scores:
                fh.write(json.dumps(score.to_json(), ensure_ascii=False) + "\n")
        click.echo(f"graded {len(scores)} responses ({ungradeable} ungradeable) -> {scores_path}")
    except MathVRError as exc:
        _fail(exc, code=2 if isinstance(exc, ConfigError) else 1)


@main.command()
@click.option("--corpus-root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--run-id", required=True)
def report(corpus_root: Path, out_root: Path, run_id: str) -> None:
    """Aggregate a graded run into report.json / report.md."""
    try:
        manifest = load_manifest(corpus_root)
        store = TraceStore(out_root, run_id)
        traces = store.load_all()
        scores_path = Path(out_root) / "scores" / f"{run_id}.jsonl"
        if not scores_path.is_file():
            raise ConfigError(f"no scores for run {run_id}; run `mathvr grade` first")
        lines = [json.loads(x) for x in scores_path.read_text(encoding="utf-8").splitlines() if x.strip()]
        header, rows = lines[0], lines[1:]
        from mathvr.judge.grading import QuestionScore

        scores = [QuestionScore.from_json(r) for r in rows]
        costs = cost_stats(traces) if traces else None
        rep = aggregate_report(scores, manifest, costs, header.get("model_id", "model"),
                               ungradeable=int(header.get("ungradeable", 0)))
        json_path, md_path = write_report(rep, Path(out_root) / "reports" / run_id)
        click.echo(f"wrote {json_path} and {md_path}")
    except MathVRError as exc:
        _fail(exc)


@main.command()
@click.argument("rater_a", type=click.Path(exists=True, path_type=Path))
@click.argument("rater_b", type=click.Path(exists=True, path_type=Path))
def agree(rater_a: Path, rater_b: Path) -> None:
    """Agreement statistics between two (id,value) CSV rater files.

    Kappa/MCC are computed when both joined vectors are binary; Pearson and
    Spearman always.
    """
    try:
        a, b = paired_vectors(load_rater_csv(rater_a), load_rater_csv(rater_b))
        binary = all(v in (0.0, 1.0) for v in a + b)
        if binary:
            stats = agreement_stats([int(v) for v in a], [int(v) for v in b], a, b).to_json()
        else:
            stats = {"kappa": None, "mcc": None, "pearson": pearson(a, b), "spearman": spearman(a, b),
                     "n": len(a)}
        click.echo(json.dumps(stats, indent=2))
    except MathVRError as exc:
        _fail(exc)


@main.command()
@click.option("--items", "items_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--judge-playback", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--exec-timeout", type=float, default=20.0)
def fidelity(items_path: Path, out_dir: Path, seed: int, judge_playback: Path | None,
             config_path: Path | None, exec_timeout: float) -> None:
    """Run a converter fidelity tournament over an items manifest."""
    try:
        items = load_items(items_path)
        judge = _choice_judge(judge_playback, config_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        with RunnerPool() as pool:
            rep = fidelity_tournament(items, pool, judge, seed=seed,
                                      work_dir=out_dir / "renders", timeout=exec_timeout)
        path = out_dir / "fidelity.json"
        path.write_text(json.dumps(rep.to_json(), indent=2), encoding="utf-8")
        click.echo(f"wrote {path}")
    except MathVRError as exc:
        _fail(exc)


@main.command()
@click.option("--corpus-root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_root", type=click.Path(path_type=Path), default=None)
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path), default=None)
@click.option("--tokens", "tokens_path", type=click.Path(exists=True, path_type=Path), default=None,
              help="JSON file mapping reviewer token -> reviewer id")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8008)
def serve(corpus_root: Path, out_root: Path | None, ui_dir: Path | None,
          tokens_path: Path | None, host: str, port: int) -> None:
    """Launch the review service."""
    try:
        import uvicorn

        from mathvr.service.app import create_app

        tokens = json.loads(tokens_path.read_text(encoding="utf-8")) if tokens_path else None
        app = create_app(corpus_root, out_root=out_root, ui_dir=ui_dir, reviewer_tokens=tokens)
        uvicorn.run(app, host=host, port=port)
    except MathVRError as exc:
        _fail(exc, code=2)


@main.command("replay")
@click.option("--out", "out_root", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--run-id", required=True)
@click.option("--exec-timeout", type=float, default=20.0)
def replay_cmd(out_root: Path, run_id: str, exec_timeout: float) -> None:
    """Re-execute a run's code blocks and diff statuses and figure counts."""
    try:
        store = TraceStore(out_root, run_id)
        traces = store.load_all()
        if not traces:
            raise ConfigError(f"run {run_id} has no traces under {out_root}")
        reports = []
        with RunnerPool() as pool:
            for trace in traces:
                reports.append(replay_trace(trace, pool, timeout=exec_timeout))
        mismatches = [r for r in reports if not r.all_match]
        click.echo(json.dumps({"traces": len(reports), "mismatched": len(mismatches),
                               "reports": [r.to_json() for r in reports]}, indent=2))
        if mismatches:
            sys.exit(3)
    except MathVRError as exc:
        _fail(exc)


def _judge_client(playback: Path | None, config_path: Path | None, judge_id: str | None = None):
    if playback is not None:
        return ScriptedJudge.from_file(playback)
    _, judge_cfg, _ = resolve_endpoints(config_path)
    if not judge_cfg.configured:
        raise ConfigError("no judge endpoint: set MATHVR_JUDGE_URL or pass --judge-playback")
    return HttpJudgeClient(judge_cfg.url, judge_id or judge_cfg.model_id or "judge", judge_cfg.key)


def _choice_judge(playback: Path | None, config_path: Path | None):
    if playback is not None:
        from mathvr.clients import PlaybackClient

        obj = json.loads(Path(playback).read_text(encoding="utf-8"))
        return PlaybackClient([json.dumps(r) for r in obj["choices"]], model_id="playback-judge")
    _, judge_cfg, _ = resolve_endpoints(config_path)
    if not judge_cfg.configured:
        raise ConfigError("no judge endpoint: set MATHVR_JUDGE_URL or pass --judge-playback")
    return HttpJudgeClient(judge_cfg.url, judge_cfg.model_id or "judge", judge_cfg.key)


if __name__ == "__main__":
    main()
