"""Job pipeline: parse -> chunk -> embed -> infer -> review, with stage-tagged
progress events.

The pipeline body is synchronous and runs one job per worker thread; the
service layer fans events out to SSE subscribers, the CLI prints them to
stderr. Per-job sequence numbers make event streams replayable and resumable.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .chunking import build_node_graph
from .config import AppConfig
from .embedding import CachingEmbedder, EmbeddingCache, HashEmbedder, HttpEmbedder, VectorIndex
from .orchestrator import OpenAIChatClient, StubChatModel, answer_all
from .questions import QuestionBank
from .responses import (JobRecord, JobStore, failure_response, human_placeholder,
                        response_from_answer)
from .tex_ingest import RawTexDocument, parse_tex
from .util import CallTimer

TERMINAL_STAGES = ("done", "failed")


@dataclass(frozen=True)
class ProgressEvent:
    seq: int
    job_id: str
    stage: str  # uploaded|parsing|chunking|embedding|inferencing|review|done|failed
    timestamp: float
    detail: str | None = None

    def to_dict(self) -> dict:
        return {"seq": self.seq, "job_id": self.job_id, "stage": self.stage,
                "timestamp": self.timestamp, "detail": self.detail}

    def to_sse(self) -> str:
        import json
        return f"id: {self.seq}\nevent: {self.stage}\ndata: {json.dumps(self.to_dict())}\n\n"


class EventLog:
    """Append-only, thread-safe event sequence for one job.

    Events are optionally mirrored to a jsonl file so a finished job's stream
    can be replayed after a service restart.
    """

    def __init__(self, job_id: str, persist_path: Path | None = None, on_emit=None):
        self.job_id = job_id
        self._events: list[ProgressEvent] = []
        self._lock = threading.Lock()
        self._persist_path = persist_path
        self._on_emit = on_emit

    def emit(self, stage: str, detail: str | None = None) -> ProgressEvent:
        with self._lock:
            if self._events and self._events[-1].stage in TERMINAL_STAGES:
                raise RuntimeError(f"no events allowed after terminal: {stage}")
            event = ProgressEvent(seq=len(self._events) + 1, job_id=self.job_id,
                                  stage=stage, timestamp=time.time(), detail=detail)
            self._events.append(event)
            if self._persist_path is not None:
                import json
                with self._persist_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event.to_dict()) + "\n")
        if self._on_emit is not None:
            self._on_emit(event)
        return event

    def since(self, after_seq: int = 0) -> list[ProgressEvent]:
        with self._lock:
            return [e for e in self._events if e.seq > after_seq]

    @property
    def finished(self) -> bool:
        with self._lock:
            return bool(self._events) and self._events[-1].stage in TERMINAL_STAGES

    @classmethod
    def from_file(cls, job_id: str, path: Path) -> "EventLog":
        import json
        log = cls(job_id)
        for line in path.read_text(encoding="utf-8").splitlines():
            d = json.loads(line)
            log._events.append(ProgressEvent(seq=d["seq"], job_id=d["job_id"],
                                             stage=d["stage"], timestamp=d["timestamp"],
                                             detail=d.get("detail")))
        return log


def build_providers(config: AppConfig, job_dir: Path | None, timer: CallTimer):
    """(chat, embedder) for a job. --stub-llm selects the deterministic local
    stubs for both, so runs need no network and no API keys."""
    if config.stub_llm:
        return StubChatModel(timer=timer), HashEmbedder()
    chat = OpenAIChatClient(config.model, timer=timer)
    embedder = HttpEmbedder(config.embedding, timer=timer)
    if job_dir is not None:
        embedder = CachingEmbedder(embedder, EmbeddingCache(job_dir / "cache"))
    return chat, embedder


def run_pipeline(record: JobRecord, tex_bytes: bytes, config: AppConfig,
                 bank: QuestionBank, store: JobStore, log: EventLog,
                 chat=None, embedder=None, artifacts: dict | None = None) -> JobRecord:
    """Drive one job to the review state (or failed). Exceptions are captured
    into the record and the failed event; they do not propagate."""
    timer = CallTimer()
    if chat is None or embedder is None:
        built_chat, built_embedder = build_providers(config, store.job_dir(record.job_id), timer)
        chat = chat or built_chat
        embedder = embedder or built_embedder
    t0 = time.perf_counter()
    try:
        log.emit("parsing")
        record.advance("parsing")
        store.save(record)
        paper = parse_tex(RawTexDocument(data=tex_bytes, filename=record.filename))
        record.paper_title = paper.title
        record.section_names = list(paper.section_names)
        record.parse_report = paper.report.to_dict()

        log.emit("chunking")
        record.advance("chunking")
        store.save(record)
        graph = build_node_graph(paper, embedder, config.chunking)

        log.emit("embedding")
        record.advance("embedding")
        store.save(record)
        index = VectorIndex.build(graph, embedder, concurrency=config.chunking.embed_concurrency)
        if artifacts is not None:
            artifacts.update(paper=paper, graph=graph, index=index)

        record.advance("inferencing")
        store.save(record)
        answers, failures = answer_all(
            bank.llm_questions, paper, graph, index, chat,
            top_k=config.retrieval.top_k,
            max_context_chars=config.model.max_context_chars,
            progress=lambda qid: log.emit("inferencing", qid),
        )
        for qid, answer in answers.items():
            record.responses[qid] = response_from_answer(answer)
        for qid, failure in failures.items():
            record.responses[qid] = failure_response(qid, failure.error)
            record.failures[qid] = failure.error
        for q in bank.human_questions:
            record.responses[q.qid] = human_placeholder(q.qid)

        record.pipeline_elapsed_s = time.perf_counter() - t0
        record.provider_elapsed_s = timer.total_s
        record.advance("review")
        store.save(record)
        log.emit("review")
    except Exception as exc:  # noqa: BLE001 - the event stream carries the reason
        record.pipeline_elapsed_s = time.perf_counter() - t0
        record.provider_elapsed_s = timer.total_s
        record.error = f"{type(exc).__name__}: {exc}"
        record.advance("failed")
        store.save(record)
        log.emit("failed", record.error)
    return record
