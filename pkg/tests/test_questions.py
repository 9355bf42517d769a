"""Question bank and prompt rendering tests, including golden snapshots."""

from __future__ import annotations

import json

import pytest

from texcheck.errors import BankSchemaError, HumanOnlyQuestion
from texcheck.questions import (EXPECTED_LLM_QIDS, default_bank_path,
                                load_question_bank, render_prompt)

from conftest import FIXTURES

GOLDEN = FIXTURES / "golden"


@pytest.fixture(scope="module")
def bank():
    return load_question_bank()


class TestBank:
    def test_counts(self, bank):
        assert len(bank.llm_questions) == 18
        assert [q.qid for q in bank.llm_questions] == list(EXPECTED_LLM_QIDS)
        assert len(bank.human_questions) >= 1

    def test_a2_official_wording(self, bank):
        assert bank.by_qid("A2").text == "Did you discuss any potential risks of your work?"

    def test_a3_filter(self, bank):
        assert bank.by_qid("A3").section_filter == ("abstract", "introduction")
        for q in bank.llm_questions:
            if q.qid != "A3":
                assert q.section_filter is None

    def test_section_e_is_human_only(self, bank):
        for q in bank.questions:
            if q.section == "E":
                assert q.answer_mode == "human_only"

    def test_missing_question_rejected(self, tmp_path):
        raw = json.loads(default_bank_path().read_text())
        raw["questions"] = [q for q in raw["questions"] if q["qid"] != "D5"]
        path = tmp_path / "bank.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(BankSchemaError) as exc:
            load_question_bank(path)
        assert exc.value.qid == "D5"

    def test_duplicate_qid_rejected(self, tmp_path):
        raw = json.loads(default_bank_path().read_text())
        raw["questions"].append(dict(raw["questions"][0]))
        path = tmp_path / "bank.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(BankSchemaError):
            load_question_bank(path)

    def test_schema_violation_rejected(self, tmp_path):
        raw = json.loads(default_bank_path().read_text())
        raw["questions"][0]["answer_mode"] = "telepathy"
        path = tmp_path / "bank.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(BankSchemaError):
            load_question_bank(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(BankSchemaError):
            load_question_bank(tmp_path / "nope.json")


class TestRenderPrompt:
    def test_a1_contains_json_and_sections(self, bank, basic_paper):
        prompt = render_prompt(bank.by_qid("A1"), basic_paper)
        assert "JSON" in prompt.text
        for name in basic_paper.section_names:
            assert name in prompt.text
        assert prompt.valid_sections == tuple(basic_paper.section_names)

    def test_human_only_rejected(self, bank, basic_paper):
        with pytest.raises(HumanOnlyQuestion):
            render_prompt(bank.by_qid("E1"), basic_paper)

    def test_block_order_for_all_questions(self, bank, basic_paper):
        for q in bank.llm_questions:
            text = render_prompt(q, basic_paper).text
            intro = text.index("You are the author")
            question = text.index("Question:")
            context = text.index("Additional Context:")
            structure = text.index("Output Structure:")
            assert intro < question < context < structure

    def test_exactly_18_render(self, bank, full_paper):
        prompts = [render_prompt(q, full_paper) for q in bank.llm_questions]
        assert len(prompts) == 18
        for p in prompts:
            assert p.valid_sections == tuple(full_paper.section_names)

    def test_rendering_is_pure(self, bank, basic_paper):
        a = render_prompt(bank.by_qid("B3"), basic_paper, ["ctx one", "ctx two"])
        b = render_prompt(bank.by_qid("B3"), basic_paper, ["ctx one", "ctx two"])
        assert a == b

    def test_section_names_in_document_order(self, bank, full_paper):
        prompt = render_prompt(bank.by_qid("C1"), full_paper)
        positions = [prompt.text.index(f"- {name}") for name in full_paper.section_names]
        assert positions == sorted(positions)

    def test_snapshot_stable(self, bank, basic_paper):
        got = {q.qid: render_prompt(q, basic_paper).text for q in bank.llm_questions}
        expected = json.loads((GOLDEN / "prompts_basic.json").read_text(encoding="utf-8"))
        assert got == expected
