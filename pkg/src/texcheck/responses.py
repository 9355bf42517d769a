"""User-facing checklist responses: formatting, human edits, markdown export,
and on-disk job records.

Jobs persist as JSON files in a per-job directory under a configurable data
root, so the artifact needs no external database. The markdown layout is
fixed and deterministic: exporting twice without edits yields identical bytes.
"""

from __future__ import annotations

import json
import re
import shutil
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .errors import JobNotInReview, SectionEUnanswered, TexcheckError, UnknownQuestion
from .orchestrator import LlmAnswer
from .questions import QuestionBank

STATE_ORDER = ("parsing", "chunking", "embedding", "inferencing", "review", "done")

NEEDS_REVIEW_PREFIX = "[NEEDS REVIEW] "


class InvalidEdit(TexcheckError):
    """Edit text was empty or otherwise unusable."""


@dataclass
class ChecklistResponse:
    qid: str
    display_text: str
    verdict: str | None          # yes | no | None (human-only, unanswered)
    section_name: str | None
    justification: str
    origin: str                  # llm | human | human_edited
    needs_review: bool = False
    prompt: str | None = None    # provenance, origin != human
    model_id: str | None = None
    elapsed_ms: int | None = None
    edited_at: float | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "qid": self.qid,
            "display_text": self.display_text,
            "verdict": self.verdict,
            "section name": self.section_name,
            "justification": self.justification,
            "origin": self.origin,
            "needs_review": self.needs_review,
            "prompt": self.prompt,
            "llm": self.model_id,
            "elapsed_ms": self.elapsed_ms,
            "edited_at": self.edited_at,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChecklistResponse":
        return cls(qid=d["qid"], display_text=d["display_text"], verdict=d.get("verdict"),
                   section_name=d.get("section name"), justification=d.get("justification", ""),
                   origin=d["origin"], needs_review=d.get("needs_review", False),
                   prompt=d.get("prompt"), model_id=d.get("llm"),
                   elapsed_ms=d.get("elapsed_ms"), edited_at=d.get("edited_at"),
                   error=d.get("error"))


def format_response(a: LlmAnswer) -> str:
    """yes -> the cited section name; no -> "None. " + justification.
    Unvalidated answers carry a visible review prefix so they cannot slip
    into a submission unnoticed."""
    if a.verdict == "yes":
        text = a.section_name or a.justification
    else:
        text = f"None. {a.justification}".strip()
    text = (text or "").strip()
    if a.needs_review:
        text = NEEDS_REVIEW_PREFIX + text
    return text


def response_from_answer(a: LlmAnswer) -> ChecklistResponse:
    return ChecklistResponse(
        qid=a.qid, display_text=format_response(a), verdict=a.verdict,
        section_name=a.section_name if a.verdict == "yes" else None,
        justification=a.justification, origin="llm", needs_review=a.needs_review,
        prompt=a.prompt, model_id=a.model_id, elapsed_ms=a.elapsed_ms,
    )


def failure_response(qid: str, error: str) -> ChecklistResponse:
    return ChecklistResponse(
        qid=qid, display_text=NEEDS_REVIEW_PREFIX + "Generation failed; answer manually.",
        verdict=None, section_name=None, justification="", origin="llm",
        needs_review=True, error=error,
    )


def human_placeholder(qid: str) -> ChecklistResponse:
    return ChecklistResponse(qid=qid, display_text="", verdict=None, section_name=None,
                             justification="", origin="human")


@dataclass
class JobRecord:
    job_id: str
    filename: str
    created_at: float
    state: str = "parsing"
    pipeline_elapsed_s: float = 0.0
    provider_elapsed_s: float = 0.0
    paper_title: str | None = None
    section_names: list[str] = field(default_factory=list)
    responses: dict[str, ChecklistResponse] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    parse_report: dict | None = None
    error: str | None = None

    def advance(self, new_state: str) -> None:
        """States only move forward along the pipeline; failed from anywhere."""
        if new_state == "failed":
            self.state = "failed"
            return
        if self.state == "failed":
            raise ValueError("job already failed")
        if STATE_ORDER.index(new_state) < STATE_ORDER.index(self.state):
            raise ValueError(f"state cannot move back: {self.state} -> {new_state}")
        self.state = new_state

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "filename": self.filename,
            "created_at": self.created_at,
            "state": self.state,
            "pipeline_elapsed_s": self.pipeline_elapsed_s,
            "provider_elapsed_s": self.provider_elapsed_s,
            "paper_title": self.paper_title,
            "section_names": self.section_names,
            "responses": {qid: r.to_dict() for qid, r in self.responses.items()},
            "failures": self.failures,
            "parse_report": self.parse_report,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JobRecord":
        return cls(
            job_id=d["job_id"], filename=d["filename"], created_at=d["created_at"],
            state=d["state"], pipeline_elapsed_s=d.get("pipeline_elapsed_s", 0.0),
            provider_elapsed_s=d.get("provider_elapsed_s", 0.0),
            paper_title=d.get("paper_title"), section_names=d.get("section_names", []),
            responses={qid: ChecklistResponse.from_dict(r)
                       for qid, r in d.get("responses", {}).items()},
            failures=d.get("failures", {}), parse_report=d.get("parse_report"),
            error=d.get("error"),
        )


def new_job(filename: str) -> JobRecord:
    return JobRecord(job_id=uuid.uuid4().hex[:12], filename=filename, created_at=time.time())


def apply_edit(job: JobRecord, qid: str, new_text: str) -> JobRecord:
    """Replace a response's display text with the user's wording.

    Section E edits become origin=human; everything else origin=human_edited
    with model provenance retained. Identical text is a no-op so repeated
    saves stay idempotent.
    """
    if job.state != "review":
        raise JobNotInReview(f"job {job.job_id} is in state {job.state!r}, not review")
    if qid not in job.responses:
        raise UnknownQuestion(f"no such question: {qid!r}")
    if not new_text.strip():
        raise InvalidEdit("edited text must be non-empty")
    r = job.responses[qid]
    if r.display_text == new_text:
        return job
    r.display_text = new_text
    r.origin = "human" if qid.startswith("E") else "human_edited"
    r.needs_review = False
    r.edited_at = time.time()
    if r.origin == "human":
        r.prompt = None
        r.model_id = None
        r.elapsed_ms = None
    return job


def export_markdown(job: JobRecord, bank: QuestionBank) -> bytes:
    """Deterministic markdown export of all responses, blocked until the
    AI-assistant section has a human answer."""
    for q in bank.human_questions:
        r = job.responses.get(q.qid)
        if r is None or not r.display_text.strip():
            raise SectionEUnanswered(f"{q.qid} must be answered by the user before export")
    missing = [q.qid for q in bank.llm_questions if q.qid not in job.responses]
    if missing:
        raise ValueError(f"responses missing for: {missing}")

    lines = ["# Responsible NLP Checklist", ""]
    lines.append(f"- Paper: {job.paper_title or '(untitled)'}")
    lines.append(f"- Source file: {job.filename}")
    lines.append("")
    for key in sorted(bank.section_titles):
        section_questions = [q for q in bank.questions if q.section == key]
        if not section_questions:
            continue
        lines.append(f"## {key}. {bank.section_titles[key]}")
        lines.append("")
        for q in section_questions:
            r = job.responses[q.qid]
            lines.append(f"### {q.qid}. {q.text}")
            lines.append("")
            lines.append(r.display_text.strip())
            lines.append("")
    lines.append("---")
    lines.append(f"Time to analyze the paper: {job.pipeline_elapsed_s:.2f} seconds "
                 f"({job.provider_elapsed_s:.2f} s inside model/embedding calls).")
    lines.append("")
    return "\n".join(lines).encode("utf-8")


_H3_RE = re.compile(r"^### ([A-E][0-9]{1,2})\. ")


def parse_exported_markdown(data: bytes) -> dict[str, str]:
    """Inverse of export_markdown for round-trip checks: qid -> display_text."""
    result: dict[str, str] = {}
    current: str | None = None
    buf: list[str] = []
    for line in data.decode("utf-8").split("\n"):
        m = _H3_RE.match(line)
        if m:
            if current is not None:
                result[current] = "\n".join(buf).strip()
            current = m.group(1)
            buf = []
        elif line.startswith("## ") or line.startswith("---"):
            if current is not None:
                result[current] = "\n".join(buf).strip()
                current = None
        elif current is not None:
            buf.append(line)
    if current is not None:
        result[current] = "\n".join(buf).strip()
    return result


class JobStore:
    """One directory per job under the data root; record.json plus artifacts."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def save(self, job: JobRecord) -> None:
        d = self.job_dir(job.job_id)
        d.mkdir(parents=True, exist_ok=True)
        tmp = d / "record.json.tmp"
        tmp.write_text(json.dumps(job.to_dict(), indent=2, ensure_ascii=False),
                       encoding="utf-8")
        tmp.replace(d / "record.json")

    def load(self, job_id: str) -> JobRecord:
        path = self.job_dir(job_id) / "record.json"
        return JobRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def exists(self, job_id: str) -> bool:
        return (self.job_dir(job_id) / "record.json").exists()

    def sweep_expired(self, retention_days: float, now: float | None = None) -> list[str]:
        """Delete job directories older than the retention window."""
        now = time.time() if now is None else now
        removed = []
        for d in self.root.iterdir():
            if not d.is_dir() or not (d / "record.json").exists():
                continue
            try:
                record = json.loads((d / "record.json").read_text(encoding="utf-8"))
                created = float(record.get("created_at", 0))
            except (json.JSONDecodeError, ValueError):
                created = 0.0
            if now - created > retention_days * 86400:
                shutil.rmtree(d)
                removed.append(d.name)
        return removed
