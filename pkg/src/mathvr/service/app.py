"""HTTP API for the review workflow and run inspection.

Endpoints:
    GET  /api/queue?status=&page=
    GET  /api/samples/{id}
    POST /api/samples/{id}/review
    GET  /api/runs
    GET  /api/runs/{run_id}/traces/{sample_id}
    GET  /api/export/benchmark

Corpus images are served under /assets/, run figures under /figures/, and
the review UI bundle (when built) under /ui/.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from mathvr.corpus.manifest import load_manifest
from mathvr.errors import InvalidMeta, RevisionConflict, UnknownSample
from mathvr.judge.meta import SampleMeta
from mathvr.judge.meta_store import MetaStore
from mathvr.orchestrator.tracestore import TraceStore
from mathvr.service.review import (
    ReviewDecision,
    ReviewLog,
    export_benchmark,
    list_queue,
)


class ReviewBody(BaseModel):
    reviewer_id: str
    verdict: str
    revision: int
    flag_reason: str | None = None
    flag_note: str = ""
    edited_meta: dict[str, Any] | None = Field(default=None)


def create_app(
    corpus_root: Path,
    out_root: Path | None = None,
    reviews_path: Path | None = None,
    meta_dir: Path | None = None,
    ui_dir: Path | None = None,
    reviewer_tokens: dict[str, str] | None = None,
) -> FastAPI:
    corpus_root = Path(corpus_root)
    manifest = load_manifest(corpus_root)
    meta_store = MetaStore(meta_dir or corpus_root / "meta")
    metas = {sid: meta_store.load(sid) for sid in meta_store.ids()}
    log = ReviewLog(reviews_path or corpus_root / "reviews.jsonl", manifest.ids())
    out_root = Path(out_root) if out_root else None

    app = FastAPI(title="mathvr review service")
    app.state.review_log = log

    def check_token(request: Request, reviewer_id: str) -> None:
        if not reviewer_tokens:
            return
        token = request.headers.get("X-Reviewer-Token", "")
        if reviewer_tokens.get(token) != reviewer_id:
            raise HTTPException(status_code=401, detail="unknown reviewer token")

    @app.get("/api/queue")
    def api_queue(
        status: str = Query(default=""),
        page: int = Query(default=0, ge=0),
        page_size: int = Query(default=50, ge=1, le=500),
    ) -> dict:
        items, total = list_queue(manifest, log, metas, status or None, page, page_size)
        return {
            "items": [
                {**item.to_json(), "revision": log.revision(item.sample.id)} for item in items
            ],
            "page": page,
            "page_size": page_size,
            "total": total,
        }

    @app.get("/api/samples/{sample_id}")
    def api_sample(sample_id: str) -> dict:
        try:
            sample = manifest.by_id(sample_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown sample {sample_id}")
        meta = log.edited_meta(sample_id) or metas.get(sample_id)
        return {
            "sample": sample.to_json(),
            "meta": meta.to_json() if meta else None,
            "status": log.status(sample_id),
            "revision": log.revision(sample_id),
            "images": {
                "question": [f"/assets/{a.path}" for a in sample.question_images],
                "solution": [f"/assets/{a.path}" for a in sample.solution_images],
            },
        }

    @app.post("/api/samples/{sample_id}/review")
    def api_review(sample_id: str, body: ReviewBody, request: Request) -> dict:
        check_token(request, body.reviewer_id)
        edited = None
        if body.edited_meta is not None:
            try:
                edited = SampleMeta.from_json(body.edited_meta)
            except (KeyError, TypeError, ValueError) as exc:
                raise HTTPException(status_code=422, detail=f"malformed edited_meta: {exc}")
        decision = ReviewDecision(
            sample_id=sample_id,
            reviewer_id=body.reviewer_id,
            verdict=body.verdict,
            revision=body.revision,
            flag_reason=body.flag_reason,
            flag_note=body.flag_note,
            edited_meta=edited,
        )
        try:
            stored = log.submit(decision)
        except UnknownSample as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except RevisionConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (InvalidMeta, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"sample_id": sample_id, "revision": stored, "status": log.status(sample_id)}

    @app.get("/api/runs")
    def api_runs() -> dict:
        runs = TraceStore.list_runs(out_root) if out_root else []
        return {"runs": runs}

    @app.get("/api/runs/{run_id}/traces/{sample_id}")
    def api_trace(run_id: str, sample_id: str) -> dict:
        if out_root is None:
            raise HTTPException(status_code=404, detail="no run output directory configured")
        store = TraceStore(out_root, run_id)
        if not store.traces_path.is_file():
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        trace = store.load(sample_id)
        if trace is None:
            raise HTTPException(status_code=404, detail=f"run {run_id} has no trace for {sample_id}")
        obj = trace.to_json()
        for segment in obj["segments"]:
            if segment["kind"] == "figure":
                segment["url"] = f"/figures/{run_id}/{segment['payload']}"
        return obj

    @app.get("/api/export/benchmark")
    def api_export() -> dict:
        exported = export_benchmark(manifest, log)
        return {
            "version": exported.version,
            "samples": [s.to_json() for s in exported.samples],
            "meta": {
                s.id: (log.edited_meta(s.id) or metas[s.id]).to_json()
                for s in exported.samples
                if s.id in metas or log.edited_meta(s.id)
            },
        }

    app.mount("/assets", StaticFiles(directory=str(corpus_root)), name="assets")
    if out_root is not None and (out_root / "figures").is_dir():
        app.mount("/figures", StaticFiles(directory=str(out_root / "figures")), name="figures")
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/")
        def index() -> RedirectResponse:
            return RedirectResponse(url="/ui/")

    return app
