"""Response formatting, edits, markdown export, and job persistence."""

from __future__ import annotations

import random

import pytest

from texcheck.errors import JobNotInReview, SectionEUnanswered, UnknownQuestion
from texcheck.orchestrator import LlmAnswer
from texcheck.questions import load_question_bank
from texcheck.responses import (InvalidEdit, JobStore, apply_edit,
                                export_markdown, failure_response, format_response,
                                human_placeholder, new_job, parse_exported_markdown,
                                response_from_answer)


def _answer(qid="A1", verdict="yes", section="3 Method", justification="because",
            needs_review=False):
    return LlmAnswer(qid=qid, verdict=verdict, section_name=section,
                     justification=justification, raw_response="{}",
                     model_id="stub-chat", elapsed_ms=12, needs_review=needs_review,
                     prompt="PROMPT")


class TestFormatResponse:
    def test_yes_formats_as_section_name(self):
        assert format_response(_answer()) == "3 Method"

    def test_no_formats_as_none_plus_justification(self):
        a = _answer(verdict="no", section=None, justification="No risks are discussed.")
        assert format_response(a) == "None. No risks are discussed."

    def test_needs_review_prefix(self):
        a = _answer(needs_review=True)
        assert format_response(a) == "[NEEDS REVIEW] 3 Method"


@pytest.fixture
def bank():
    return load_question_bank()


@pytest.fixture
def review_job(bank):
    job = new_job("paper.tex")
    job.paper_title = "A Minimal Study"
    for state in ("chunking", "embedding", "inferencing"):
        job.advance(state)
    for q in bank.llm_questions:
        verdict = "yes" if q.qid.endswith(("1", "3")) else "no"
        job.responses[q.qid] = response_from_answer(
            _answer(qid=q.qid, verdict=verdict,
                    section="3 Method" if verdict == "yes" else None,
                    justification=f"reasoning for {q.qid}"))
    for q in bank.human_questions:
        job.responses[q.qid] = human_placeholder(q.qid)
    job.pipeline_elapsed_s = 4.2
    job.provider_elapsed_s = 3.9
    job.advance("review")
    return job


class TestApplyEdit:
    def test_edit_keeps_provenance(self, review_job):
        apply_edit(review_job, "A1", "2 Approach")
        r = review_job.responses["A1"]
        assert r.origin == "human_edited"
        assert r.display_text == "2 Approach"
        assert r.prompt == "PROMPT"
        assert r.model_id == "stub-chat"
        assert r.edited_at is not None

    def test_edit_e_becomes_human(self, review_job):
        apply_edit(review_job, "E1", "No AI assistants were used.")
        r = review_job.responses["E1"]
        assert r.origin == "human"
        assert r.prompt is None and r.model_id is None

    def test_unknown_qid(self, review_job):
        with pytest.raises(UnknownQuestion):
            apply_edit(review_job, "Z9", "text")

    def test_not_in_review(self, bank):
        job = new_job("p.tex")
        with pytest.raises(JobNotInReview):
            apply_edit(job, "A1", "text")

    def test_idempotent_for_identical_text(self, review_job):
        apply_edit(review_job, "A1", "same text")
        stamp = review_job.responses["A1"].edited_at
        apply_edit(review_job, "A1", "same text")
        assert review_job.responses["A1"].edited_at == stamp

    def test_empty_text_rejected(self, review_job):
        with pytest.raises(InvalidEdit):
            apply_edit(review_job, "A1", "   ")

    def test_edit_clears_needs_review(self, review_job):
        review_job.responses["A2"].needs_review = True
        apply_edit(review_job, "A2", "resolved by hand")
        assert not review_job.responses["A2"].needs_review


class TestExport:
    def test_blocked_until_e_answered(self, review_job, bank):
        with pytest.raises(SectionEUnanswered):
            export_markdown(review_job, bank)

    def test_nineteen_headings(self, review_job, bank):
        apply_edit(review_job, "E1", "No AI assistants were used.")
        md = export_markdown(review_job, bank).decode()
        assert md.count("\n### ") == 19
        assert md.count("\n## ") == 5

    def test_formatting_rules_visible(self, review_job, bank):
        apply_edit(review_job, "E1", "None.")
        md = export_markdown(review_job, bank).decode()
        assert "\n3 Method\n" in md
        assert "None. reasoning for A2" in md

    def test_deterministic(self, review_job, bank):
        apply_edit(review_job, "E1", "None.")
        assert export_markdown(review_job, bank) == export_markdown(review_job, bank)

    def test_elapsed_time_logged(self, review_job, bank):
        apply_edit(review_job, "E1", "None.")
        md = export_markdown(review_job, bank).decode()
        assert "4.20 seconds" in md

    def test_round_trip(self, review_job, bank):
        apply_edit(review_job, "E1", "No assistants used.")
        apply_edit(review_job, "B2", "Custom wording\nwith two lines")
        md = export_markdown(review_job, bank)
        recovered = parse_exported_markdown(md)
        expected = {qid: r.display_text.strip() for qid, r in review_job.responses.items()}
        assert recovered == expected


class TestProvenanceConservation:
    def test_llm_origin_carries_prompt_and_model(self, review_job):
        for r in review_job.responses.values():
            if r.origin == "llm":
                assert r.prompt and r.model_id
            if r.origin == "human":
                assert r.prompt is None and r.model_id is None

    def test_failure_record_flags_review(self):
        r = failure_response("C2", "ProviderError: down")
        assert r.needs_review
        assert r.display_text.startswith("[NEEDS REVIEW]")
        assert r.error == "ProviderError: down"


class TestStateMachine:
    def test_monotone_advance(self):
        job = new_job("x.tex")
        for state in ("chunking", "embedding", "inferencing", "review", "done"):
            job.advance(state)
        with pytest.raises(ValueError):
            job.advance("review")

    def test_failed_from_anywhere(self):
        job = new_job("x.tex")
        job.advance("embedding")
        job.advance("failed")
        assert job.state == "failed"

    def test_fuzz_random_sequences(self):
        states = ["parsing", "chunking", "embedding", "inferencing", "review", "done"]
        rng = random.Random(17)
        for _ in range(300):
            job = new_job("x.tex")
            for _ in range(rng.randint(1, 8)):
                target = rng.choice(states + ["failed"])
                before = job.state
                try:
                    job.advance(target)
                except ValueError:
                    assert job.state == before  # rejected transitions change nothing
            if job.state != "failed":
                assert states.index(job.state) >= 0


class TestJobStore:
    def test_save_load_round_trip(self, tmp_path, review_job):
        store = JobStore(tmp_path)
        store.save(review_job)
        loaded = store.load(review_job.job_id)
        assert loaded.to_dict() == review_job.to_dict()

    def test_sweep_expired(self, tmp_path):
        store = JobStore(tmp_path)
        old = new_job("old.tex")
        old.created_at -= 8 * 86400
        fresh = new_job("fresh.tex")
        store.save(old)
        store.save(fresh)
        removed = store.sweep_expired(retention_days=7)
        assert removed == [old.job_id]
        assert store.exists(fresh.job_id)
        assert not store.exists(old.job_id)

    def test_response_json_keys_match_wire_contract(self, review_job):
        d = review_job.responses["A1"].to_dict()
        for key in ("section name", "justification", "prompt", "llm"):
            assert key in d
