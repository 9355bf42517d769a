"""Chunk graph: one node per section, split into parent/child chunks at
embedding-similarity breakpoints, with navigational metadata.

Child chunks are the spans between semantic breakpoints; consecutive children
are packed into parent chunks capped at ``max_parent_chars``. All chunk texts
are slices of the section body, so concatenating a parent's children recovers
the parent text exactly up to whitespace, and concatenating a section's
parents recovers the section body.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .embedding import embed_batch
from .errors import UnknownSection
from .tex_ingest import ParsedPaper


@dataclass(frozen=True)
class ChunkingConfig:
    breakpoint_percentile: float = 95.0
    max_parent_chars: int = 2048
    embed_concurrency: int = 4


@dataclass(frozen=True)
class ChunkNode:
    id: str
    kind: str  # section | parent | child
    text: str
    section_name: str
    prev_id: str | None = None
    next_id: str | None = None
    parent_id: str | None = None


@dataclass
class NodeStore:
    """Id-keyed node collection with a per-section index. Immutable after build."""

    nodes: dict[str, ChunkNode] = field(default_factory=dict)
    section_index: dict[str, list[str]] = field(default_factory=dict)

    def add(self, node: ChunkNode) -> None:
        self.nodes[node.id] = node
        self.section_index.setdefault(node.section_name, []).append(node.id)

    def get(self, node_id: str) -> ChunkNode:
        return self.nodes[node_id]

    def by_kind(self, kind: str) -> list[ChunkNode]:
        return [n for n in self.nodes.values() if n.kind == kind]

    def validate(self) -> None:
        """Referential integrity: every prev/next/parent id resolves and the
        section index covers every node."""
        indexed = {nid for ids in self.section_index.values() for nid in ids}
        for node in self.nodes.values():
            for ref in (node.prev_id, node.next_id, node.parent_id):
                if ref is not None and ref not in self.nodes:
                    raise ValueError(f"dangling reference {ref!r} on node {node.id!r}")
            if node.id not in indexed:
                raise ValueError(f"node {node.id!r} missing from section_index")

    def to_json(self) -> str:
        payload = {
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind,
                    "section_name": n.section_name,
                    "prev_id": n.prev_id,
                    "next_id": n.next_id,
                    "parent_id": n.parent_id,
                    "text": n.text,
                }
                for n in self.nodes.values()
            ],
            "section_index": self.section_index,
        }
        return json.dumps(payload, indent=2, ensure_ascii=False)


# --- sentence segmentation ---------------------------------------------------

_ABBREVIATIONS = {
    "e.g", "i.e", "etc", "et al", "al", "cf", "vs", "viz", "resp", "approx",
    "fig", "figs", "eq", "eqs", "sec", "secs", "no", "nos", "p", "pp",
    "dr", "mr", "mrs", "ms", "prof", "st",
}
_CLOSERS = "\"')]}"


def _token_before(text: str, idx: int) -> str:
    """Word immediately preceding ``idx``, lowercased (letters only)."""
    j = idx
    while j > 0 and (text[j - 1].isalpha() or text[j - 1] == "."):
        j -= 1
    return text[j:idx].lower().rstrip(".")


def split_sentence_spans(text: str) -> list[tuple[int, int]]:
    """(start, end) spans of sentences, covering every non-whitespace char.

    Boundaries: terminal punctuation followed by whitespace and an uppercase
    letter, digit or opener — unless the preceding token is on the
    abbreviation guard list — plus blank lines.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    while start < n and text[start].isspace():
        start += 1
    i = start
    while i < n:
        c = text[i]
        boundary_end = -1
        if c in ".!?":
            end = i + 1
            while end < n and text[end] in _CLOSERS:
                end += 1
            if end >= n:
                boundary_end = end
            elif text[end].isspace():
                k = end
                while k < n and text[k].isspace():
                    k += 1
                nxt = text[k] if k < n else ""
                if k >= n or nxt.isupper() or nxt.isdigit() or nxt in "\"'([{-":
                    tok = _token_before(text, i)
                    two = " ".join(text[max(0, i - 12):i].lower().split()[-2:]).rstrip(".")
                    if c != "." or (tok not in _ABBREVIATIONS and two not in _ABBREVIATIONS
                                    and not (len(tok) == 1 and tok.isalpha())):
                        boundary_end = end
        elif c == "\n":
            k = i + 1
            while k < n and text[k] in " \t":
                k += 1
            if k < n and text[k] == "\n":
                boundary_end = i
        if boundary_end >= 0:
            if text[start:boundary_end].strip():
                spans.append((start, boundary_end))
            start = boundary_end
            while start < n and text[start].isspace():
                start += 1
            i = start
            continue
        i += 1
    if start < n and text[start:].strip():
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        spans.append((start, end))
    return spans


def split_sentences(text: str) -> list[str]:
    return [text[a:b] for a, b in split_sentence_spans(text)]


# --- graph construction -------------------------------------------------------


def _chain(nodes: list[ChunkNode]) -> list[ChunkNode]:
    """Set prev/next so the list forms a doubly linked chain."""
    out = []
    for i, node in enumerate(nodes):
        out.append(replace(
            node,
            prev_id=nodes[i - 1].id if i > 0 else None,
            next_id=nodes[i + 1].id if i + 1 < len(nodes) else None,
        ))
    return out


def build_section_nodes(paper: ParsedPaper) -> NodeStore:
    """One kind=section node per retained section, chained in document order."""
    nodes = [
        ChunkNode(id=f"s{i:03d}", kind="section", text=s.body, section_name=s.display_name)
        for i, s in enumerate(paper.sections, start=1)
    ]
    store = NodeStore()
    for node in _chain(nodes):
        store.add(node)
    return store


def semantic_split(node: ChunkNode, embedder, cfg: ChunkingConfig = ChunkingConfig()) -> list[tuple[ChunkNode, list[ChunkNode]]]:
    """Split one section node into (parent, children) chunk pairs.

    Breakpoints fall where the cosine distance between adjacent sentence
    embeddings exceeds the ``breakpoint_percentile`` of the section's own
    distance distribution. Sections under two sentences are passed through
    as a single parent/child pair.
    """
    text = node.text
    spans = split_sentence_spans(text)

    if len(spans) < 2:
        child_spans = [[(0, len(text))]] if text else []
    else:
        vectors = embed_batch(embedder, [text[a:b] for a, b in spans],
                              concurrency=cfg.embed_concurrency)
        matrix = np.asarray([v.values for v in vectors], dtype=np.float64)
        dists = kernels.adjacent_distances(matrix)
        threshold = float(np.percentile(dists, cfg.breakpoint_percentile))
        groups: list[list[tuple[int, int]]] = [[spans[0]]]
        for i, span in enumerate(spans[1:]):
            if dists[i] > threshold:
                groups.append([span])
            else:
                groups[-1].append(span)
        child_spans = groups

    # pack consecutive children into parents of at most max_parent_chars
    parent_groups: list[list[list[tuple[int, int]]]] = []
    current: list[list[tuple[int, int]]] = []
    for group in child_spans:
        tentative_start = current[0][0][0] if current else group[0][0]
        if current and group[-1][1] - tentative_start > cfg.max_parent_chars:
            parent_groups.append(current)
            current = []
        current.append(group)
    if current:
        parent_groups.append(current)

    result: list[tuple[ChunkNode, list[ChunkNode]]] = []
    for j, pgroup in enumerate(parent_groups, start=1):
        pid = f"{node.id}.p{j:03d}"
        p_start, p_end = pgroup[0][0][0], pgroup[-1][-1][1]
        parent = ChunkNode(id=pid, kind="parent", text=text[p_start:p_end],
                           section_name=node.section_name, parent_id=node.id)
        children = [
            ChunkNode(id=f"{pid}.c{k:03d}", kind="child", text=text[g[0][0]:g[-1][1]],
                      section_name=node.section_name, parent_id=pid)
            for k, g in enumerate(pgroup, start=1)
        ]
        result.append((parent, children))
    return result


def build_node_graph(paper: ParsedPaper, embedder, cfg: ChunkingConfig = ChunkingConfig()) -> NodeStore:
    """Full graph: section nodes plus parent/child chunks, all chains linked
    across the whole document in document order."""
    section_store = build_section_nodes(paper)
    sections = list(section_store.nodes.values())

    all_parents: list[ChunkNode] = []
    all_children: list[ChunkNode] = []
    for snode in sections:
        for parent, children in semantic_split(snode, embedder, cfg):
            all_parents.append(parent)
            all_children.extend(children)

    store = NodeStore()
    for node in sections:
        store.add(node)
    for node in _chain(all_parents):
        store.add(node)
    for node in _chain(all_children):
        store.add(node)
    store.validate()
    return store


def lineage(store: NodeStore, section_names) -> set[str]:
    """All node ids (section, parent and child) owned by the named sections."""
    ids: set[str] = set()
    for name in section_names:
        if name not in store.section_index:
            raise UnknownSection(f"no section named {name!r}")
        ids.update(store.section_index[name])
    return ids
