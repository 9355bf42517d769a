"""HTTP service: upload, live progress over SSE, review/edit, export.

Endpoints (versioned under /api/v1):
  POST  /api/v1/jobs                      multipart upload of one .tex file
  GET   /api/v1/jobs/{id}/events          text/event-stream progress
  GET   /api/v1/jobs/{id}/responses       all checklist responses + provenance
  PATCH /api/v1/jobs/{id}/responses/{qid} edit one response
  GET   /api/v1/jobs/{id}/export          markdown download

Each job's pipeline runs as one task on a bounded worker pool; per-job edits
are serialized with a lock. SSE replays the full event history (resumable via
Last-Event-ID) and closes after the terminal event.
"""

from __future__ import annotations

import asyncio
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import AppConfig
from .errors import JobNotInReview, SectionEUnanswered, UnknownQuestion
from .pipeline import TERMINAL_STAGES, EventLog, run_pipeline
from .questions import QuestionBank, load_question_bank
from .responses import InvalidEdit, JobRecord, JobStore, apply_edit, export_markdown, new_job


class _JobHandle:
    def __init__(self, record: JobRecord, log: EventLog):
        self.record = record
        self.log = log
        self.lock = threading.Lock()


class JobManager:
    """Owns job records, event logs, and the pipeline worker pool."""

    def __init__(self, config: AppConfig, bank: QuestionBank):
        self.config = config
        self.bank = bank
        self.store = JobStore(config.data_root)
        self.executor = ThreadPoolExecutor(max_workers=config.service.max_concurrent_jobs)
        self._jobs: dict[str, _JobHandle] = {}
        self._lock = threading.Lock()

    def submit(self, filename: str, data: bytes) -> JobRecord:
        self.store.sweep_expired(self.config.service.retention_days)
        record = new_job(filename)
        job_dir = self.store.job_dir(record.job_id)
        job_dir.mkdir(parents=True, exist_ok=True)
        (job_dir / "upload.tex").write_bytes(data)
        log = EventLog(record.job_id, persist_path=job_dir / "events.jsonl")
        handle = _JobHandle(record, log)
        with self._lock:
            self._jobs[record.job_id] = handle
        log.emit("uploaded", filename)
        self.store.save(record)
        self.executor.submit(run_pipeline, record, data, self.config, self.bank,
                             self.store, log)
        return record

    def handle(self, job_id: str) -> _JobHandle:
        with self._lock:
            if job_id in self._jobs:
                return self._jobs[job_id]
        if not self.store.exists(job_id):
            raise HTTPException(404, f"unknown job: {job_id}")
        # revive a persisted job (service restarted); its pipeline is long over
        record = self.store.load(job_id)
        events_path = self.store.job_dir(job_id) / "events.jsonl"
        log = (EventLog.from_file(job_id, events_path) if events_path.exists()
               else EventLog(job_id))
        handle = _JobHandle(record, log)
        with self._lock:
            self._jobs.setdefault(job_id, handle)
            return self._jobs[job_id]

    def shutdown(self) -> None:
        self.executor.shutdown(wait=False, cancel_futures=True)


class EditBody(BaseModel):
    text: str


def _responses_view(record: JobRecord) -> dict:
    return {
        "job_id": record.job_id,
        "state": record.state,
        "filename": record.filename,
        "paper_title": record.paper_title,
        "section_names": record.section_names,
        "pipeline_elapsed_s": record.pipeline_elapsed_s,
        "provider_elapsed_s": record.provider_elapsed_s,
        "responses": {qid: r.to_dict() for qid, r in record.responses.items()},
        "failures": record.failures,
        "parse_report": record.parse_report,
    }


def create_app(config: AppConfig | None = None, bank: QuestionBank | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    config = config or AppConfig()
    bank = bank or load_question_bank(config.question_bank)
    manager = JobManager(config, bank)

    app = FastAPI(title="texcheck")
    app.state.manager = manager

    @app.post("/api/v1/jobs", status_code=202)
    async def upload(file: UploadFile):
        filename = Path(file.filename or "upload").name
        if not filename.lower().endswith(".tex"):
            raise HTTPException(415, "only .tex files are accepted")
        data = await file.read()
        if len(data) > config.service.max_upload_bytes:
            raise HTTPException(413, f"file exceeds {config.service.max_upload_bytes} bytes")
        record = await asyncio.to_thread(manager.submit, filename, data)
        return {"job_id": record.job_id, "state": record.state}

    @app.get("/api/v1/jobs/{job_id}/events")
    async def stream_events(job_id: str, request: Request):
        handle = manager.handle(job_id)
        last_raw = request.headers.get("last-event-id") or request.query_params.get("last_event_id") or "0"
        try:
            last = int(last_raw)
        except ValueError:
            last = 0

        async def gen():
            sent = last
            while True:
                for event in handle.log.since(sent):
                    sent = event.seq
                    yield event.to_sse()
                    if event.stage in TERMINAL_STAGES:
                        return
                if handle.log.finished:
                    return  # client resumed past the terminal event
                if await request.is_disconnected():
                    return
                await asyncio.sleep(0.025)

        return StreamingResponse(gen(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache",
                                          "X-Accel-Buffering": "no"})

    @app.get("/api/v1/jobs/{job_id}/responses")
    async def get_responses(job_id: str):
        handle = manager.handle(job_id)
        if handle.record.state not in ("review", "done"):
            raise HTTPException(409, {"error": "job not ready", "state": handle.record.state})
        return _responses_view(handle.record)

    @app.patch("/api/v1/jobs/{job_id}/responses/{qid}")
    async def patch_response(job_id: str, qid: str, body: EditBody):
        handle = manager.handle(job_id)

        def _edit():
            with handle.lock:
                apply_edit(handle.record, qid, body.text)
                manager.store.save(handle.record)

        try:
            await asyncio.to_thread(_edit)
        except UnknownQuestion as exc:
            raise HTTPException(404, str(exc))
        except JobNotInReview as exc:
            raise HTTPException(409, str(exc))
        except InvalidEdit as exc:
            raise HTTPException(422, str(exc))
        return _responses_view(handle.record)

    @app.get("/api/v1/jobs/{job_id}/export")
    async def export(job_id: str):
        handle = manager.handle(job_id)
        if handle.record.state not in ("review", "done"):
            raise HTTPException(409, {"error": "job not ready", "state": handle.record.state})
        try:
            with handle.lock:
                data = export_markdown(handle.record, bank)
                if handle.record.state == "review":
                    handle.record.advance("done")
                    manager.store.save(handle.record)
                    handle.log.emit("done")
        except SectionEUnanswered as exc:
            raise HTTPException(422, str(exc))
        stem = Path(handle.record.filename).stem or "paper"
        return Response(content=data, media_type="text/markdown",
                        headers={"Content-Disposition":
                                 f'attachment; filename="{stem}-checklist.md"'})

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
