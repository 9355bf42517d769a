"""Checklist question bank and prompt rendering.

Question and guidance wording ships as a versioned JSON data file rather than
code: the official checklist text gets revised, and the bank can be swapped
out wholesale (``--question-bank``) to target another conference's checklist.
Each language-model question renders into a four-block prompt — introduction,
question, additional context, output structure — ending with the paper's own
section names as the set of valid answer choices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import BankSchemaError, HumanOnlyQuestion
from .tex_ingest import ParsedPaper

# The qids a bank must answer via the model: checklist sections A-D.
EXPECTED_LLM_QIDS = (
    "A1", "A2", "A3",
    "B1", "B2", "B3", "B4", "B5", "B6",
    "C1", "C2", "C3", "C4",
    "D1", "D2", "D3", "D4", "D5",
)


@dataclass(frozen=True)
class ChecklistQuestion:
    qid: str
    section: str
    text: str
    guidance: str
    answer_mode: str  # llm | human_only
    section_filter: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RenderedPrompt:
    qid: str
    question: str
    text: str
    valid_sections: tuple[str, ...]
    context_texts: tuple[str, ...]


@dataclass(frozen=True)
class QuestionBank:
    version: str
    section_titles: dict[str, str]
    questions: tuple[ChecklistQuestion, ...]

    def by_qid(self, qid: str) -> ChecklistQuestion:
        for q in self.questions:
            if q.qid == qid:
                return q
        raise KeyError(qid)

    @property
    def llm_questions(self) -> tuple[ChecklistQuestion, ...]:
        return tuple(q for q in self.questions if q.answer_mode == "llm")

    @property
    def human_questions(self) -> tuple[ChecklistQuestion, ...]:
        return tuple(q for q in self.questions if q.answer_mode == "human_only")


def _load_schema() -> dict:
    with resources.files("texcheck.data").joinpath("questions.schema.json").open() as fh:
        return json.load(fh)


def default_bank_path() -> Path:
    return Path(str(resources.files("texcheck.data").joinpath("questions.json")))


def load_question_bank(path: str | Path | None = None) -> QuestionBank:
    """Load and validate a bank file. The default ships with the package."""
    bank_path = Path(path) if path is not None else default_bank_path()
    try:
        raw = json.loads(bank_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise BankSchemaError(f"question bank not found: {bank_path}")
    except json.JSONDecodeError as exc:
        raise BankSchemaError(f"question bank is not valid JSON: {exc}")

    try:
        jsonschema.validate(raw, _load_schema())
    except jsonschema.ValidationError as exc:
        raise BankSchemaError(f"question bank schema violation: {exc.message}")

    questions = tuple(
        ChecklistQuestion(
            qid=item["qid"],
            section=item["section"],
            text=item["text"],
            guidance=item["guidance"],
            answer_mode=item["answer_mode"],
            section_filter=tuple(item["section_filter"]) if item.get("section_filter") else None,
        )
        for item in raw["questions"]
    )

    qids = [q.qid for q in questions]
    dupes = {q for q in qids if qids.count(q) > 1}
    if dupes:
        raise BankSchemaError(f"duplicate qid in bank: {sorted(dupes)}", qid=sorted(dupes)[0])
    llm_qids = {q.qid for q in questions if q.answer_mode == "llm"}
    missing = [q for q in EXPECTED_LLM_QIDS if q not in llm_qids]
    if missing:
        raise BankSchemaError(f"bank is missing llm-mode questions: {missing}", qid=missing[0])
    extra = sorted(llm_qids - set(EXPECTED_LLM_QIDS))
    if extra:
        raise BankSchemaError(f"unexpected llm-mode questions: {extra}", qid=extra[0])
    for q in questions:
        if q.section == "E" and q.answer_mode != "human_only":
            raise BankSchemaError("section E questions must be human_only", qid=q.qid)
    if not any(q.section == "E" for q in questions):
        raise BankSchemaError("bank has no section E question")
    return QuestionBank(version=raw["version"], section_titles=dict(raw["sections"]),
                        questions=questions)


_INTRODUCTION = (
    "You are the author of the research paper excerpted below. Answer the "
    "following checklist question about your own paper, truthfully and "
    "precisely, using only what the paper itself says."
)

_OUTPUT_STRUCTURE = (
    'Respond with a JSON object with "answer", "section name", and '
    '"justification" as the keys. "answer" must be "yes" or "no". When the '
    'answer is "yes", "section name" must be exactly one of the valid section '
    'names listed below. Provide a justification for both "yes" and "no" '
    "answers. The valid section names are:"
)


def render_prompt(q: ChecklistQuestion, paper: ParsedPaper,
                  context_texts: list[str] | tuple[str, ...] = ()) -> RenderedPrompt:
    """Render the four-block prompt for one question.

    Retrieved context travels on the RenderedPrompt; the orchestrator decides
    per call how much of it fits alongside the prompt text.
    """
    if q.answer_mode != "llm":
        raise HumanOnlyQuestion(f"{q.qid} must be answered by the user, not the model")
    valid_sections = tuple(paper.section_names)
    section_list = "\n".join(f"- {name}" for name in valid_sections)
    text = (
        f"{_INTRODUCTION}\n\n"
        f"Question: {q.text}\n\n"
        f"Additional Context: {q.guidance}\n\n"
        f"Output Structure: {_OUTPUT_STRUCTURE}\n"
        f"{section_list}"
    )
    return RenderedPrompt(qid=q.qid, question=q.text, text=text,
                          valid_sections=valid_sections,
                          context_texts=tuple(context_texts))
