"""Shared fixtures: fixture papers, deterministic stub embedders, kernel warmup."""

from __future__ import annotations

import hashlib
import random
from pathlib import Path

import numpy as np
import pytest

from texcheck import kernels
from texcheck.embedding import EmbeddingVector
from texcheck.tex_ingest import RawTexDocument, parse_tex

FIXTURES = Path(__file__).parent / "fixtures"


def load_doc(name: str) -> RawTexDocument:
    path = FIXTURES / name
    return RawTexDocument(data=path.read_bytes(), filename=name)


def parse_fixture(name: str):
    return parse_tex(load_doc(name))


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    kernels.warmup()


@pytest.fixture(scope="session")
def basic_paper():
    return parse_fixture("basic.tex")


@pytest.fixture(scope="session")
def full_paper():
    return parse_fixture("full_featured.tex")


@pytest.fixture(scope="session")
def ten_page_paper():
    return parse_fixture("ten_page.tex")


class SeededRandomEmbedder:
    """Deterministic per-text random unit vector (seeded by the text hash)."""

    def __init__(self, dim: int = 16, model_id: str = "stub-random"):
        self.dim = dim
        self.model_id = model_id

    def _vector(self, text: str) -> np.ndarray:
        seed = int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def embed(self, texts):
        return [EmbeddingVector(values=self._vector(t), model_id=self.model_id) for t in texts]


class MappedEmbedder:
    """Embedder driven by an explicit text -> vector function (tests control geometry)."""

    def __init__(self, fn, model_id: str = "stub-mapped"):
        self.fn = fn
        self.model_id = model_id

    def embed(self, texts):
        return [EmbeddingVector(values=np.asarray(self.fn(t), dtype=np.float64),
                                model_id=self.model_id) for t in texts]


_WORDS = (
    "signal filter lattice probe margin kernel cohort ledger outlier replay "
    "stress audit tier ceiling floor routing fusion batch decay drift anchor "
    "sample spread window budget trace vector branch merge slice"
).split()


def make_random_tex(rng: random.Random) -> str:
    """A small random paper: abstract plus 1-6 sections of random prose."""

    def sentence():
        words = rng.choices(_WORDS, k=rng.randint(3, 10))
        return " ".join(words).capitalize() + "."

    def paragraph():
        return " ".join(sentence() for _ in range(rng.randint(1, 6)))

    parts = ["\\documentclass{article}", "\\begin{document}", "\\begin{abstract}",
             paragraph(), "\\end{abstract}"]
    for i in range(rng.randint(1, 6)):
        parts.append(f"\\section{{Part {chr(ord('N') + i)}}}")
        for _ in range(rng.randint(1, 3)):
            parts.append(paragraph())
            parts.append("")
    parts.append("\\end{document}")
    return "\n".join(parts)
