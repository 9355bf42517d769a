"""Parser tests: comment stripping, preamble removal, float reduction,
exclusion, numbering, and the parse invariants."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from texcheck.errors import EmptyDocument, NoAbstractFound
from texcheck.tex_ingest import (RawTexDocument, Section, drop_excluded_sections,
                                 parse_tex, reduce_floats_to_captions,
                                 strip_comments, strip_preamble)

from conftest import FIXTURES, parse_fixture

GOLDEN = FIXTURES / "golden"
PARSED_FIXTURES = ["basic.tex", "full_featured.tex", "heading_abstract.tex",
                   "markup_mix.tex", "ten_page.tex"]

_VERBATIM_MARKERS = ("verbatim", "Verbatim", "lstlisting", "minted", "alltt")


def count_unescaped_percent(text: str) -> int:
    """Independent oracle: regex-free char scan counting comment-starting %,
    skipping verbatim-like environments."""
    count = 0
    i = 0
    n = len(text)
    active_env = None
    while i < n:
        if active_env is None:
            for env in _VERBATIM_MARKERS:
                marker = "\\begin{" + env + "}"
                if text.startswith(marker, i):
                    active_env = env
                    i += len(marker)
                    break
            else:
                c = text[i]
                if c == "\\":
                    i += 2
                    continue
                if c == "%":
                    count += 1
                i += 1
            continue
        end_marker = "\\end{" + active_env + "}"
        if text.startswith(end_marker, i):
            active_env = None
            i += len(end_marker)
        else:
            i += 1
    return count


class TestStripComments:
    def test_escaped_percent_is_prose(self):
        assert strip_comments("cost is 5\\% higher % TODO fix") == "cost is 5\\% higher"

    def test_whole_line_comment_dropped(self):
        assert strip_comments("line one\n% whole-line comment\nline two") == "line one\nline two"

    def test_double_backslash_then_percent_is_comment(self):
        # \\ is a line break; the % after it starts a comment
        assert strip_comments("break\\\\% gone") == "break\\\\"

    def test_fixture_comments_all_removed(self):
        raw = (FIXTURES / "full_featured.tex").read_text()
        assert count_unescaped_percent(raw) >= 10  # the fixture really has comments
        assert count_unescaped_percent(strip_comments(raw)) == 0

    def test_verbatim_percent_preserved(self):
        raw = (FIXTURES / "full_featured.tex").read_text()
        assert "raw % percent stays here" in strip_comments(raw)

    @pytest.mark.parametrize("name", PARSED_FIXTURES)
    def test_oracle_zero_on_all_fixtures(self, name):
        cleaned = strip_comments((FIXTURES / name).read_text())
        assert count_unescaped_percent(cleaned) == 0


class TestStripPreamble:
    def test_abstract_environment(self):
        text = "\\documentclass{article}\\usepackage{x}\\begin{abstract}A\\end{abstract}rest"
        assert strip_preamble(text) == "A\\end{abstract}rest"

    def test_no_abstract_raises(self):
        with pytest.raises(NoAbstractFound):
            strip_preamble("\\documentclass{article}\\section{Intro}body")

    def test_fixture_preamble_fully_removed(self):
        # hand-marked: the abstract body of basic.tex starts with this sentence
        text = (FIXTURES / "basic.tex").read_text()
        out = strip_preamble(text)
        assert out.lstrip().startswith("We study widget alignment.")
        assert "documentclass" not in out
        assert "\\title" not in out

    def test_heading_style_abstract(self):
        out = strip_preamble((FIXTURES / "heading_abstract.tex").read_text())
        assert out.lstrip().startswith("Sprocket tuning balances torque and wear.")


def _sections(titles_kinds):
    return [Section(index=None, ordinal=None, raw_title=t, display_name=t, body="x", kind=k)
            for t, k in titles_kinds]


class TestDropExcluded:
    def test_basic_exclusion(self):
        secs = _sections([("Intro", "numbered"), ("Acknowledgements", "unnumbered"),
                          ("Method", "numbered")])
        kept, dropped = drop_excluded_sections(secs)
        assert [s.raw_title for s in kept] == ["Intro", "Method"]
        assert dropped == ["Acknowledgements"]

    def test_case_insensitive(self):
        secs = _sections([("Intro", "numbered"), ("ACKNOWLEDGMENTS", "numbered")])
        kept, dropped = drop_excluded_sections(secs)
        assert [s.raw_title for s in kept] == ["Intro"]
        assert dropped == ["ACKNOWLEDGMENTS"]

    def test_fixture_acknowledgements_logged(self, full_paper):
        assert "Acknowledgements" in full_paper.report.dropped_sections
        assert all(s.raw_title != "Acknowledgements" for s in full_paper.sections)


class TestReduceFloats:
    def test_figure_caption_kept(self):
        out = reduce_floats_to_captions(
            "a\n\\begin{figure}\\includegraphics{x}\\caption{Results.}\\end{figure}\nb")
        assert "Figure: Results." in out
        assert "includegraphics" not in out

    def test_captionless_table_vanishes(self):
        out = reduce_floats_to_captions(
            "a\n\\begin{table}\\begin{tabular}{l}q\\\\\\end{tabular}\\end{table}\nb")
        assert "tabular" not in out
        assert "q" not in out

    def test_fixture_caption_counts(self):
        # full_featured holds 3 captioned figures, 2 captioned tables, 1 captionless table
        raw = strip_comments((FIXTURES / "full_featured.tex").read_text())
        out = reduce_floats_to_captions(raw)
        assert out.count("Figure: ") == 3
        assert out.count("Table: ") == 2
        assert "Secret" not in out  # tabular row content from the captionless table


class TestParseTex:
    def test_sequential_numbering(self, basic_paper):
        names = basic_paper.section_names
        assert names == ["Abstract", "1 Introduction", "2 Method", "3 Results"]

    def test_title_extracted(self, basic_paper):
        assert basic_paper.title == "A Minimal Study of Widget Alignment"

    def test_unresolved_include_warned(self, full_paper):
        assert any("unresolved include: related_work" in w for w in full_paper.report.warnings)

    def test_full_fixture_hand_count(self, full_paper):
        # hand count over full_featured.tex: abstract + 4 numbered + 2 starred
        # (Limitations, Ethics Statement) + 2 appendix sections
        assert full_paper.section_names == [
            "Abstract", "1 Introduction", "2 Approach", "3 Experiments",
            "4 Conclusion", "Limitations", "Ethics Statement",
            "A Window Sizes", "B Extra Plots",
        ]
        kinds = [s.kind for s in full_paper.sections]
        assert kinds == ["abstract", "numbered", "numbered", "numbered", "numbered",
                         "unnumbered", "unnumbered", "appendix", "appendix"]

    def test_exclusion_does_not_gap_numbering(self):
        paper = parse_fixture("heading_abstract.tex")
        assert paper.section_names == ["Abstract", "1 Introduction", "2 Taxonomy",
                                       "3 Open Problems"]

    def test_no_abstract_propagates(self):
        with pytest.raises(NoAbstractFound):
            parse_fixture("no_abstract.tex")

    def test_empty_document(self):
        with pytest.raises(EmptyDocument):
            parse_tex(RawTexDocument(data=b"   \n ", filename="empty.tex"))

    def test_subsections_folded_into_parent(self, full_paper):
        intro = full_paper.sections[1]
        assert "Contributions" in intro.body
        assert all("Contributions" not in s.display_name for s in full_paper.sections)

    def test_captions_inline_in_bodies(self, full_paper):
        approach = next(s for s in full_paper.sections if s.raw_title == "Approach")
        assert "Figure: Drift over time for nine gadgets." in approach.body


def render_paper(paper) -> str:
    """Rebuild a minimal TeX document from parsed sections (test-side inverse)."""
    parts = []
    in_appendix = False
    for s in paper.sections:
        if s.kind == "abstract":
            parts.append(f"\\begin{{abstract}}\n{s.body}\n\\end{{abstract}}\n")
            continue
        if s.kind == "appendix" and not in_appendix:
            parts.append("\\appendix\n")
            in_appendix = True
        cmd = "\\section*" if s.kind == "unnumbered" else "\\section"
        parts.append(f"{cmd}{{{s.raw_title}}}\n{s.body}\n")
    return "".join(parts)


class TestInvariants:
    @pytest.mark.parametrize("name", PARSED_FIXTURES)
    def test_reparse_is_identity(self, name):
        paper = parse_fixture(name)
        again = parse_tex(RawTexDocument(data=render_paper(paper).encode(), filename=name))
        original = [(s.display_name, s.body, s.kind, s.index) for s in paper.sections]
        rebuilt = [(s.display_name, s.body, s.kind, s.index) for s in again.sections]
        assert rebuilt == original

    @pytest.mark.parametrize("name", PARSED_FIXTURES)
    def test_numbered_ordinals_consecutive(self, name):
        paper = parse_fixture(name)
        indices = [s.index for s in paper.sections if s.kind == "numbered"]
        assert indices == list(range(1, len(indices) + 1))

    @pytest.mark.parametrize("name", PARSED_FIXTURES)
    def test_abstract_first(self, name):
        paper = parse_fixture(name)
        assert paper.sections[0].kind == "abstract"
        assert paper.sections[0].display_name == "Abstract"

    def test_captions_verbatim_exactly_once(self, full_paper):
        whole = "\n".join(s.body for s in full_paper.sections)
        for caption in ["Drift over time for nine gadgets.",
                        "Calibration error by load.",
                        "Wide layout of the calibration rig.",
                        "Error histogram across trials.",
                        "Sweep grid used in the appendix."]:
            assert whole.count(caption) == 1
        assert "Secret" not in whole

    @pytest.mark.parametrize("name", PARSED_FIXTURES)
    def test_no_unescaped_percent_in_bodies(self, name):
        paper = parse_fixture(name)
        for s in paper.sections:
            assert count_unescaped_percent(s.body) == 0


class TestGoldenSections:
    """Byte-exact section lists, frozen as JSON goldens."""

    @pytest.mark.parametrize("name", PARSED_FIXTURES)
    def test_matches_golden(self, name):
        paper = parse_fixture(name)
        got = {
            "title": paper.title,
            "sections": [
                {"display_name": s.display_name, "raw_title": s.raw_title,
                 "kind": s.kind, "index": s.index, "ordinal": s.ordinal, "body": s.body}
                for s in paper.sections
            ],
            "dropped_sections": paper.report.dropped_sections,
        }
        golden_path = GOLDEN / (Path(name).stem + ".json")
        expected = json.loads(golden_path.read_text(encoding="utf-8"))
        assert got == expected
