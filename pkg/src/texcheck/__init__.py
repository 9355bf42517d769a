"""texcheck: retrieval-augmented assistant for the ARR Responsible NLP checklist.

Pipeline: parse a paper's TeX source into numbered sections, build a
parent/child chunk graph with semantic breakpoints, embed and retrieve with
exact cosine search, answer the 18 A-D checklist questions with a configurable
chat model at temperature 0, then let a human review, edit and export the
responses to markdown.
"""

__version__ = "0.1.0"

from .tex_ingest import ParsedPaper, RawTexDocument, Section, parse_tex  # noqa: F401
from .chunking import ChunkNode, NodeStore, build_node_graph, lineage  # noqa: F401
from .embedding import VectorIndex, cosine, retrieve  # noqa: F401
from .questions import load_question_bank, render_prompt  # noqa: F401
from .orchestrator import LlmAnswer, answer_question, parse_answer, tree_summarize  # noqa: F401
from .responses import JobRecord, apply_edit, export_markdown, format_response  # noqa: F401
