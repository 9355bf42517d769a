"""Model inference per checklist question: tree-summarize over retrieved
context, temperature-0 chat completion, and structured-verdict parsing.

Providers are interchangeable behind one ``complete(prompt) -> str`` method:
an OpenAI-compatible HTTP client (which also covers hosted open models) and a
deterministic local stub for tests and offline runs. Questions are answered
sequentially and in isolation — one question's failure never touches another.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass

import httpx

from .chunking import NodeStore, lineage
from .embedding import VectorIndex, retrieve
from .errors import ContextOverflow, ProviderError, UnparseableResponse
from .questions import ChecklistQuestion, RenderedPrompt, render_prompt
from .tex_ingest import ParsedPaper, normalize_title
from .util import CallTimer, with_retries

DEFAULT_CHAT_MODEL = "gpt-3.5-turbo-0613"


@dataclass(frozen=True)
class ModelConfig:
    provider_base_url: str = "https://api.openai.com/v1"
    model_id: str = DEFAULT_CHAT_MODEL
    temperature: float = 0.00
    max_context_chars: int = 16000
    api_key_env: str = "OPENAI_API_KEY"


@dataclass
class LlmAnswer:
    qid: str
    verdict: str  # yes | no
    section_name: str | None
    justification: str
    raw_response: str
    model_id: str
    elapsed_ms: int
    needs_review: bool = False
    review_reason: str | None = None
    prompt: str = ""


@dataclass
class QuestionFailure:
    qid: str
    error: str


class _Transient(Exception):
    pass


class OpenAIChatClient:
    """OpenAI-compatible /chat/completions client with retry and context guard."""

    def __init__(self, config: ModelConfig, timer: CallTimer | None = None,
                 transport: httpx.BaseTransport | None = None, timeout: float = 120.0):
        self.config = config
        self.model_id = config.model_id
        self._timer = timer or CallTimer()
        self._client = httpx.Client(base_url=config.provider_base_url.rstrip("/"),
                                    transport=transport, timeout=timeout)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, prompt: str) -> str:
        payload = {
            "model": self.config.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        with self._timer.track():
            resp = self._client.post("/chat/completions", headers=self._headers(), json=payload)
        if resp.status_code in (408, 429) or resp.status_code >= 500:
            raise _Transient(f"provider returned {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise ProviderError(f"provider returned {resp.status_code}",
                                status=resp.status_code, body=resp.text[:2000])
        return resp.json()["choices"][0]["message"]["content"]

    def complete(self, prompt: str) -> str:
        if len(prompt) > self.config.max_context_chars:
            raise ContextOverflow(
                f"prompt is {len(prompt)} chars, limit {self.config.max_context_chars}")
        try:
            return with_retries(lambda: self._post(prompt),
                                transient=(_Transient, httpx.TransportError))
        except (_Transient, httpx.TransportError) as exc:
            raise ProviderError(f"provider failed after retries: {exc}") from exc


class StubChatModel:
    """Deterministic offline chat model.

    Summarize calls get a content-derived condensation; final calls get a
    JSON verdict. ``default_verdict`` of "auto" flips yes/no deterministically
    per question so both response formats get exercised; "yes"/"no" force one.
    Every prompt is appended to ``calls`` for call-count assertions.
    """

    model_id = "stub-chat"

    def __init__(self, default_verdict: str = "auto", fail_on: str | None = None,
                 timer: CallTimer | None = None):
        self.default_verdict = default_verdict
        self.fail_on = fail_on  # substring of the prompt that triggers a ProviderError
        self.calls: list[str] = []
        self._timer = timer or CallTimer()

    def complete(self, prompt: str) -> str:
        with self._timer.track():
            self.calls.append(prompt)
            if self.fail_on and self.fail_on in prompt:
                raise ProviderError(f"stub failure triggered by {self.fail_on!r}")
            if "Output Structure:" not in prompt:
                digest = hashlib.sha1(prompt.encode()).hexdigest()[:8]
                return f"Condensed notes ({digest}): " + " ".join(prompt.split())[:160]
            m = re.search(r"^Question: (.+)$", prompt, re.MULTILINE)
            question = m.group(1) if m else ""
            sections = re.findall(r"^- (.+)$", prompt, re.MULTILINE)
            verdict = self.default_verdict
            if verdict == "auto":
                verdict = "yes" if len(question) % 2 == 0 else "no"
            if verdict == "yes" and sections:
                chosen = next((s for s in sections if s[:1].isdigit()), sections[0])
                return json.dumps({"answer": "yes", "section name": chosen,
                                   "justification": f"The paper covers this in {chosen}."})
            return json.dumps({"answer": "no", "section name": "",
                               "justification": "The paper does not address this point."})


# --- tree summarize -----------------------------------------------------------

_SEP = "\n\n---\n\n"
_RESERVE = 512  # headroom for wrapper text around packed context
_MAX_DEPTH = 8


def _pack(texts: list[str], budget: int) -> list[list[str]]:
    """Greedy in-order packing: each batch's chars + separators stay <= budget.

    A single text longer than the budget is truncated to fit (logged by the
    caller via the summary itself being shorter).
    """
    batches: list[list[str]] = []
    current: list[str] = []
    used = 0
    for text in texts:
        if len(text) > budget:
            text = text[:budget]
        extra = len(text) + (len(_SEP) if current else 0)
        if current and used + extra > budget:
            batches.append(current)
            current, used = [], 0
            extra = len(text)
        current.append(text)
        used += extra
    if current:
        batches.append(current)
    return batches


def _summarize_prompt(question: str, batch: list[str]) -> str:
    return (
        "Summarize the following excerpts from a research paper, keeping every "
        "detail relevant to this checklist question, including section names.\n\n"
        f"Question: {question}\n\nExcerpts:{_SEP}{_SEP.join(batch)}"
    )


def _final_prompt(prompt: RenderedPrompt, batch: list[str]) -> str:
    return (
        f"Context information from the paper is below.{_SEP}"
        f"{_SEP.join(batch)}{_SEP}"
        f"Given the context information, answer the question.\n\n{prompt.text}"
    )


def tree_summarize(provider, prompt: RenderedPrompt, parent_texts: list[str],
                   max_context_chars: int) -> str:
    """Recursive condensation: batch-summarize contexts that exceed one window,
    then merge summaries until a single answer call remains."""
    budget = max_context_chars - len(prompt.text) - _RESERVE
    if budget <= 0:
        raise ContextOverflow("prompt alone exceeds the context budget")
    texts = list(parent_texts) or [""]
    for _ in range(_MAX_DEPTH):
        batches = _pack(texts, budget)
        if len(batches) == 1:
            return provider.complete(_final_prompt(prompt, batches[0]))
        texts = [provider.complete(_summarize_prompt(prompt.question, batch))
                 for batch in batches]
    raise ProviderError("tree summarize did not converge; summaries keep overflowing")


def chat_complete(provider, prompt: str) -> str:
    """Single completion call against whatever provider is configured."""
    return provider.complete(prompt)


# --- response parsing ----------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)


def _candidate_objects(raw: str):
    m = _FENCE_RE.search(raw)
    if m:
        yield m.group(1)
    # balanced-brace scan from each opening brace
    starts = [i for i, c in enumerate(raw) if c == "{"]
    for start in starts[:20]:
        depth = 0
        for i in range(start, len(raw)):
            if raw[i] == "{":
                depth += 1
            elif raw[i] == "}":
                depth -= 1
                if depth == 0:
                    yield raw[start:i + 1]
                    break


def _lenient_loads(text: str) -> dict | None:
    for attempt in (text, re.sub(r",\s*([}\]])", r"\1", text)):
        try:
            obj = json.loads(attempt)
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    return None


def extract_json_object(raw: str) -> dict:
    """First well-formed JSON object in model output, tolerating prose
    wrappers, code fences and trailing commas."""
    for candidate in _candidate_objects(raw):
        obj = _lenient_loads(candidate)
        if obj is not None:
            return obj
    raise UnparseableResponse(f"no JSON object found in response: {raw[:160]!r}")


def _normalize_key(key: str) -> str:
    return re.sub(r"[\s_]+", " ", key.strip().lower())


def normalize_section_name(name: str) -> str:
    """Lowercase, strip punctuation and a leading ordinal token ("3", "A")."""
    s = re.sub(r"[^\w\s]", " ", name.lower())
    tokens = s.split()
    if len(tokens) > 1 and (tokens[0].isdigit() or (len(tokens[0]) == 1 and tokens[0].isalpha())):
        tokens = tokens[1:]
    return " ".join(tokens)


def resolve_section(name: str, valid_sections) -> str | None:
    """Exact match after normalization; anything looser risks a wrong citation."""
    target = normalize_section_name(name)
    if not target:
        return None
    for candidate in valid_sections:
        if normalize_section_name(candidate) == target:
            return candidate
    return None


def parse_answer(raw: str, valid_sections, qid: str = "") -> LlmAnswer:
    """Parse one model response into a structured verdict.

    Validation failures (unknown section name, missing justification, a
    not-applicable verdict) mark the answer needs_review instead of raising;
    only a missing/garbled JSON object raises UnparseableResponse.
    """
    obj = extract_json_object(raw)
    fields = {_normalize_key(k): v for k, v in obj.items()}
    verdict_raw = str(fields.get("answer", "")).strip().lower().rstrip(".!")
    section_raw = str(fields.get("section name", "") or "").strip()
    justification = str(fields.get("justification", "") or "").strip()

    needs_review = False
    reason = None
    if verdict_raw.startswith("yes"):
        verdict = "yes"
    elif verdict_raw in ("n/a", "na", "not applicable") or verdict_raw.startswith("not applicable"):
        verdict = "no"
        needs_review = True
        reason = "model answered 'not applicable', which the checklist does not accept directly"
    elif verdict_raw.startswith("no"):
        verdict = "no"
    else:
        raise UnparseableResponse(f"unrecognized answer value: {verdict_raw!r}")

    section_name = None
    if verdict == "yes":
        section_name = resolve_section(section_raw, valid_sections)
        if section_name is None:
            needs_review = True
            reason = f"section name {section_raw!r} does not match any paper section"
            section_name = section_raw or None
    if verdict == "no" and not justification and not needs_review:
        needs_review = True
        reason = "no justification given for a 'no' answer"

    return LlmAnswer(qid=qid, verdict=verdict, section_name=section_name,
                     justification=justification, raw_response=raw, model_id="",
                     elapsed_ms=0, needs_review=needs_review, review_reason=reason)


_REPAIR_PROMPT = (
    "Your previous reply could not be parsed. Respond with only the JSON object "
    "— keys \"answer\", \"section name\", \"justification\" — and nothing else.\n\n"
    "Previous reply:\n{raw}"
)


# --- per-question pipeline ------------------------------------------------------


def resolve_role_sections(paper: ParsedPaper, roles) -> set[str]:
    """Map filter roles like "abstract"/"introduction" to display names."""
    names: set[str] = set()
    for role in roles:
        for s in paper.sections:
            if role == "abstract":
                if s.kind == "abstract":
                    names.add(s.display_name)
            elif normalize_title(s.raw_title) == normalize_title(role):
                names.add(s.display_name)
    return names


def answer_question(q: ChecklistQuestion, paper: ParsedPaper, store: NodeStore,
                    index: VectorIndex, provider, *, top_k: int = 5,
                    max_context_chars: int = 16000) -> LlmAnswer:
    """retrieve -> render -> tree-summarize -> parse, with one repair re-prompt."""
    t0 = time.perf_counter()

    node_filter = None
    if q.section_filter:
        names = resolve_role_sections(paper, q.section_filter)
        if names:
            node_filter = lineage(store, names)

    query_text = f"{q.text}\n{q.guidance}".strip()
    result = retrieve(store, index, query_text, node_filter=node_filter, top_k=top_k)
    parent_texts = [store.get(pid).text for pid in result.parent_ids]
    prompt = render_prompt(q, paper, parent_texts)

    raw = tree_summarize(provider, prompt, parent_texts, max_context_chars)
    try:
        answer = parse_answer(raw, prompt.valid_sections, qid=q.qid)
    except UnparseableResponse:
        repaired = provider.complete(_REPAIR_PROMPT.format(raw=raw[:2000]))
        answer = parse_answer(repaired, prompt.valid_sections, qid=q.qid)

    answer.model_id = getattr(provider, "model_id", "")
    answer.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    answer.prompt = prompt.text
    return answer


def answer_all(questions, paper: ParsedPaper, store: NodeStore, index: VectorIndex,
               provider, *, top_k: int = 5, max_context_chars: int = 16000,
               progress=None) -> tuple[dict[str, LlmAnswer], dict[str, QuestionFailure]]:
    """Answer every llm-mode question sequentially. Failures are isolated:
    a broken question becomes a QuestionFailure and the rest proceed."""
    answers: dict[str, LlmAnswer] = {}
    failures: dict[str, QuestionFailure] = {}
    for q in questions:
        if progress is not None:
            progress(q.qid)
        try:
            answers[q.qid] = answer_question(q, paper, store, index, provider,
                                             top_k=top_k, max_context_chars=max_context_chars)
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            failures[q.qid] = QuestionFailure(qid=q.qid, error=f"{type(exc).__name__}: {exc}")
    return answers, failures
