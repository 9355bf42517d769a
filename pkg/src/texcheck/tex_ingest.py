"""TeX source ingestion: turn an uploaded .tex file into a cleaned, numbered section list.

The parse is deliberately lightweight (regex + char scans, no macro expansion):
comments are stripped, everything before the abstract is dropped, floats are
reduced to their captions, subsections are folded into their parent section,
and boilerplate sections (acknowledgments, references) are removed. Numbered
sections receive ordinals 1..n in document order; appendix sections receive
letter ordinals; starred sections keep their bare title.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import EmptyDocument, NoAbstractFound

DEFAULT_EXCLUDED_TITLES = (
    "acknowledgments",
    "acknowledgements",
    "acknowledgment",
    "acknowledgement",
    "references",
    "bibliography",
)

# Environments whose content must pass through the comment stripper untouched.
_VERBATIM_ENVS = ("verbatim", "Verbatim", "lstlisting", "minted", "alltt")

_FLOAT_ENVS = {
    "figure": "Figure",
    "figure*": "Figure",
    "table": "Table",
    "table*": "Table",
}


@dataclass(frozen=True)
class RawTexDocument:
    """A single uploaded .tex file, still undecoded."""

    data: bytes
    filename: str


@dataclass(frozen=True)
class Section:
    """One top-level section of the paper, cleaned and numbered.

    ``index`` is the 1-based ordinal for numbered sections and None otherwise.
    ``ordinal`` is the display ordinal ("3" for numbered, "A" for appendix,
    None for the abstract and starred sections).
    """

    index: int | None
    ordinal: str | None
    raw_title: str
    display_name: str
    body: str
    kind: str  # abstract | numbered | appendix | unnumbered


@dataclass
class ParseReport:
    """Log of every destructive transformation applied during parsing."""

    warnings: list[str] = field(default_factory=list)
    dropped_sections: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def to_dict(self) -> dict:
        return {"warnings": list(self.warnings), "dropped_sections": list(self.dropped_sections)}


@dataclass(frozen=True)
class ParsedPaper:
    sections: tuple[Section, ...]
    title: str | None
    report: ParseReport

    @property
    def section_names(self) -> list[str]:
        return [s.display_name for s in self.sections]


def _first_unescaped_percent(line: str) -> int:
    """Index of the first % that starts a comment, or -1.

    A backslash escapes the following character, so ``\\%`` is prose while
    ``\\\\%`` is a line break followed by a comment.
    """
    i = 0
    n = len(line)
    while i < n:
        c = line[i]
        if c == "\\":
            i += 2
            continue
        if c == "%":
            return i
        i += 1
    return -1


def strip_comments(text: str) -> str:
    """Remove %-comments. Whole-line comments disappear entirely; trailing
    comments are cut at the %. Verbatim-like environments pass through."""
    out: list[str] = []
    active_verbatim: str | None = None
    for line in text.split("\n"):
        if active_verbatim is not None:
            out.append(line)
            if f"\\end{{{active_verbatim}}}" in line:
                active_verbatim = None
            continue
        begun = next((env for env in _VERBATIM_ENVS if f"\\begin{{{env}}}" in line), None)
        if begun is not None:
            out.append(line)
            if f"\\end{{{begun}}}" not in line:
                active_verbatim = begun
            continue
        cut = _first_unescaped_percent(line)
        if cut == -1:
            out.append(line)
        elif line[:cut].strip():
            out.append(line[:cut].rstrip())
        # else: whole-line comment, drop the line
    return "\n".join(out)


_ABSTRACT_ENV_RE = re.compile(r"\\begin\{abstract\}")
_ABSTRACT_HEADING_RE = re.compile(r"\\section\*?\{\s*Abstract\s*\}", re.IGNORECASE)


def strip_preamble(text: str) -> str:
    """Drop everything before the abstract body (documentclass, packages, title block).

    Raises NoAbstractFound when neither an abstract environment nor an
    explicit abstract heading exists.
    """
    env = _ABSTRACT_ENV_RE.search(text)
    heading = _ABSTRACT_HEADING_RE.search(text)
    if env is not None and (heading is None or env.start() <= heading.start()):
        return text[env.end():]
    if heading is not None:
        return text[heading.end():]
    raise NoAbstractFound("no \\begin{abstract} or abstract heading in document")


def _balanced_arg(text: str, open_idx: int) -> tuple[str, int]:
    """Content of the {...} group opening at ``open_idx`` and the index just past it."""
    assert text[open_idx] == "{"
    depth = 0
    i = open_idx
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return text[open_idx + 1:i], i + 1
        i += 1
    return text[open_idx + 1:], n  # unbalanced: rest of text


_CAPTION_RE = re.compile(r"\\caption(?:of)?\s*(?:\[[^\]]*\])?\s*\{")


def _extract_captions(body: str) -> list[str]:
    captions = []
    pos = 0
    while True:
        m = _CAPTION_RE.search(body, pos)
        if m is None:
            break
        content, end = _balanced_arg(body, m.end() - 1)
        captions.append(content.strip())
        pos = end
    return captions


_FLOAT_BEGIN_RE = re.compile(r"\\begin\{(figure\*?|table\*?)\}")


def reduce_floats_to_captions(text: str, report: ParseReport | None = None) -> str:
    """Replace each figure/table environment by its caption(s), prefixed
    "Figure:" or "Table:". Floats without captions vanish."""
    out = []
    pos = 0
    while True:
        m = _FLOAT_BEGIN_RE.search(text, pos)
        if m is None:
            out.append(text[pos:])
            break
        env = m.group(1)
        out.append(text[pos:m.start()])
        end_marker = f"\\end{{{env}}}"
        end = text.find(end_marker, m.end())
        if end == -1:
            if report is not None:
                report.warn(f"unbalanced {env} environment, begin marker removed")
            pos = m.end()
            continue
        label = _FLOAT_ENVS[env]
        lines = [f"{label}: {cap}" for cap in _extract_captions(text[m.end():end]) if cap]
        if lines:
            out.append("\n".join(lines) + "\n")
        pos = end + len(end_marker)
    return "".join(out)


_INCLUDE_RE = re.compile(r"\\(?:input|include)\{([^}]*)\}")


def _resolve_includes(text: str, report: ParseReport) -> str:
    """Single-file mode: includes are not followed, only logged."""

    def _drop(m: re.Match) -> str:
        report.warn(f"unresolved include: {m.group(1)}")
        return ""

    return _INCLUDE_RE.sub(_drop, text)


_TITLE_RE = re.compile(r"\\title\s*(?:\[[^\]]*\])?\s*\{")


def _extract_title(text: str) -> str | None:
    m = _TITLE_RE.search(text)
    if m is None:
        return None
    content, _ = _balanced_arg(text, m.end() - 1)
    title = _clean_text(re.sub(r"\\thanks\s*\{[^}]*\}", "", content))
    title = " ".join(title.split())
    return title or None


# Inline commands whose single argument is kept as plain text.
_UNWRAP_CMDS = (
    "textit", "textbf", "emph", "texttt", "textsc", "textsf", "textrm",
    "underline", "mbox", "text", "textsuperscript", "textsubscript",
)
_UNWRAP_RE = re.compile(r"\\(?:%s)\s*\{([^{}]*)\}" % "|".join(_UNWRAP_CMDS))

# Commands removed together with their argument.
_DROP_ARG_RE = re.compile(
    r"\\(?:label|cite|citep|citet|citealp|citealt|citeauthor|citeyear|ref|eqref|"
    r"autoref|cref|Cref|pageref|vspace|hspace|includegraphics|bibliography|"
    r"bibliographystyle|caption|vskip)\s*(?:\[[^\]]*\])?\s*\{[^{}]*\}"
)

# Bare commands removed outright.
_DROP_BARE_RE = re.compile(
    r"\\(?:maketitle|centering|noindent|newpage|clearpage|onecolumn|twocolumn|"
    r"small|footnotesize|scriptsize|normalsize|large|Large|LARGE|itshape|bfseries|"
    r"hline|toprule|midrule|bottomrule|medskip|bigskip|smallskip|indent|par|appendix)\b\*?"
)

_THEBIB_RE = re.compile(r"\\begin\{thebibliography\}.*?\\end\{thebibliography\}", re.DOTALL)

_LIST_ENV_RE = re.compile(r"\\(?:begin|end)\{(?:itemize|enumerate|description|quote|quotation|center|flushleft|flushright)\}")
_FOOTNOTE_RE = re.compile(r"\\footnote\s*\{")
_HREF_RE = re.compile(r"\\href\s*\{[^{}]*\}\s*\{([^{}]*)\}")
_URL_RE = re.compile(r"\\url\s*\{([^{}]*)\}")


def _replace_footnotes(text: str) -> str:
    """\\footnote{X} -> " (X)" — footnote prose stays searchable."""
    out = []
    pos = 0
    while True:
        m = _FOOTNOTE_RE.search(text, pos)
        if m is None:
            out.append(text[pos:])
            break
        out.append(text[pos:m.start()])
        content, end = _balanced_arg(text, m.end() - 1)
        content = content.strip()
        if content:
            out.append(f" ({content})")
        pos = end
    return "".join(out)


def _clean_text(text: str) -> str:
    """Reduce TeX markup to searchable prose. Conservative: unknown commands
    and character escapes (\\%, \\&) are left alone so a reparse is stable."""
    text = _replace_footnotes(text)
    text = _HREF_RE.sub(r"\1", text)
    text = _URL_RE.sub(r"\1", text)
    for _ in range(3):  # unwrap nested formatting, innermost first
        text, n = _UNWRAP_RE.subn(r"\1", text)
        if n == 0:
            break
    text = _DROP_ARG_RE.sub("", text)
    text = _LIST_ENV_RE.sub("", text)
    text = re.sub(r"\\item\b\s*", "- ", text)
    text = _DROP_BARE_RE.sub("", text)
    text = text.replace("\\\\", " ")
    text = re.sub(r"\\end\{document\}", "", text)
    text = re.sub(r"[ \t]+", " ", text)
    text = re.sub(r" ([.,;:!?])", r"\1", text)  # gaps left by dropped citations
    lines = [ln.strip() for ln in text.split("\n")]
    text = "\n".join(lines)
    text = re.sub(r"\n{3,}", "\n\n", text)
    return text.strip()


_SECTION_RE = re.compile(r"\\section(\*)?\s*(?:\[[^\]]*\])?\s*\{")
_SUBSECTION_RE = re.compile(r"\\(?:subsection|subsubsection|paragraph|subparagraph)(\*)?\s*(?:\[[^\]]*\])?\s*\{")
_APPENDIX_RE = re.compile(r"\\appendix\b")


def _fold_subsections(body: str) -> str:
    """Replace subsection/paragraph commands with their bare title as a text line."""
    out = []
    pos = 0
    while True:
        m = _SUBSECTION_RE.search(body, pos)
        if m is None:
            out.append(body[pos:])
            break
        out.append(body[pos:m.start()])
        title, end = _balanced_arg(body, m.end() - 1)
        out.append(f"\n{title.strip()}\n")
        pos = end
    return "".join(out)


@dataclass
class _RawSection:
    title: str
    body: str
    star: bool
    in_appendix: bool


def _split_sections(tail: str) -> tuple[str, list[_RawSection]]:
    """Split the post-preamble text into (abstract body, raw section list)."""
    end_abs = tail.find("\\end{abstract}")
    first_sec = _SECTION_RE.search(tail)
    if end_abs != -1 and (first_sec is None or end_abs < first_sec.start()):
        abstract = tail[:end_abs]
        rest = tail[end_abs + len("\\end{abstract}"):]
    elif first_sec is not None:
        abstract = tail[:first_sec.start()]
        rest = tail[first_sec.start():]
    else:
        abstract = tail
        rest = ""

    markers = []  # (pos, title_end, title, star)
    pos = 0
    while True:
        m = _SECTION_RE.search(rest, pos)
        if m is None:
            break
        title, end = _balanced_arg(rest, m.end() - 1)
        markers.append((m.start(), end, title.strip(), m.group(1) is not None))
        pos = end

    appendix_at = _APPENDIX_RE.search(rest)
    appendix_pos = appendix_at.start() if appendix_at else None

    sections = []
    for i, (start, title_end, title, star) in enumerate(markers):
        body_end = markers[i + 1][0] if i + 1 < len(markers) else len(rest)
        body = rest[title_end:body_end]
        in_appendix = appendix_pos is not None and start > appendix_pos
        sections.append(_RawSection(title=title, body=body, star=star, in_appendix=in_appendix))
    return abstract, sections


def normalize_title(title: str) -> str:
    return re.sub(r"[^a-z0-9 ]", "", title.lower()).strip()


def drop_excluded_sections(
    sections: list[Section],
    excluded_titles: tuple[str, ...] = DEFAULT_EXCLUDED_TITLES,
) -> tuple[list[Section], list[str]]:
    """Filter out sections on the exclusion list (case-insensitive title match).

    Returns (kept sections, dropped titles) — the caller logs the drops.
    """
    excluded = {normalize_title(t) for t in excluded_titles}
    kept, dropped = [], []
    for s in sections:
        if normalize_title(s.raw_title) in excluded:
            dropped.append(s.raw_title)
        else:
            kept.append(s)
    return kept, dropped


def _appendix_letter(i: int) -> str:
    """0 -> A, 25 -> Z, 26 -> AA."""
    letters = ""
    i += 1
    while i > 0:
        i, rem = divmod(i - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def parse_tex(
    doc: RawTexDocument,
    excluded_titles: tuple[str, ...] = DEFAULT_EXCLUDED_TITLES,
) -> ParsedPaper:
    """Full parse: comments, preamble, floats, section split, exclusion, numbering."""
    report = ParseReport()
    if not doc.data or not doc.data.strip():
        raise EmptyDocument(f"{doc.filename}: file is empty")
    try:
        text = doc.data.decode("utf-8")
    except UnicodeDecodeError:
        text = doc.data.decode("utf-8", errors="replace")
        report.warn("invalid UTF-8 bytes replaced with U+FFFD")
    if not text.strip():
        raise EmptyDocument(f"{doc.filename}: no text content")

    text = strip_comments(text)
    title = _extract_title(text)
    tail = strip_preamble(text)
    tail = _resolve_includes(tail, report)
    tail = _THEBIB_RE.sub("", tail)
    tail = reduce_floats_to_captions(tail, report)

    abstract_body, raw_sections = _split_sections(tail)
    abstract_body = _clean_text(abstract_body)
    if not abstract_body:
        raise NoAbstractFound("abstract marker present but abstract body is empty")

    pending: list[Section] = []
    for raw in raw_sections:
        body = _clean_text(_fold_subsections(raw.body))
        if raw.star:
            kind = "unnumbered"
        elif raw.in_appendix:
            kind = "appendix"
        else:
            kind = "numbered"
        pending.append(Section(index=None, ordinal=None, raw_title=raw.title,
                               display_name=raw.title, body=body, kind=kind))

    kept, dropped = drop_excluded_sections(pending, excluded_titles)
    report.dropped_sections.extend(dropped)

    sections: list[Section] = [
        Section(index=None, ordinal=None, raw_title="Abstract",
                display_name="Abstract", body=abstract_body, kind="abstract")
    ]
    num = 0
    app = 0
    for s in kept:
        if not s.body:
            report.warn(f"dropped empty section: {s.raw_title}")
            continue
        if s.kind == "numbered":
            num += 1
            ordinal: str | None = str(num)
            index: int | None = num
        elif s.kind == "appendix":
            ordinal = _appendix_letter(app)
            app += 1
            index = None
        else:
            ordinal = None
            index = None
        display = f"{ordinal} {s.raw_title}" if ordinal else s.raw_title
        sections.append(Section(index=index, ordinal=ordinal, raw_title=s.raw_title,
                                display_name=display, body=s.body, kind=s.kind))

    return ParsedPaper(sections=tuple(sections), title=title, report=report)
