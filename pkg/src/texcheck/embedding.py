"""Embedding providers and the in-memory retrieval index.

The index is an exact flat scan: papers produce a few hundred child chunks at
most, so nothing fancier is warranted. Queries score child chunks by cosine
similarity and hits are resolved to their parent chunks (small-to-big).
Retrieval is fully deterministic: ties are broken by ascending node id.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np

from typing import TYPE_CHECKING

from . import kernels
from .errors import DimensionMismatch, EmbedderUnavailable, EmptyIndex, ZeroVector
from .util import CallTimer, with_retries

if TYPE_CHECKING:
    from .chunking import NodeStore

DEFAULT_EMBEDDING_MODEL = "text-embedding-ada-002"


@dataclass
class EmbeddingVector:
    values: np.ndarray  # float64, fixed length per index
    model_id: str


@dataclass(frozen=True)
class EmbeddingConfig:
    provider_base_url: str = "https://api.openai.com/v1"
    model_id: str = DEFAULT_EMBEDDING_MODEL
    api_key_env: str = "OPENAI_API_KEY"


@dataclass(frozen=True)
class RetrievalResult:
    parent_ids: tuple[str, ...]          # deduplicated, best child score first
    child_hits: tuple[tuple[str, float], ...]  # (child_id, cosine score)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Plain cosine similarity with strict input validation."""
    va = np.asarray(a.values, dtype=np.float64)
    vb = np.asarray(b.values, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"vector lengths differ: {va.shape[0]} vs {vb.shape[0]}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for zero vectors")
    return float(va @ vb) / (na * nb)


class HttpEmbedder:
    """OpenAI-compatible /embeddings client. Transient failures are retried
    up to 3 times with exponential backoff."""

    def __init__(self, config: EmbeddingConfig, timer: CallTimer | None = None,
                 transport: httpx.BaseTransport | None = None, timeout: float = 60.0):
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

    def _post(self, texts: list[str]) -> list[np.ndarray]:
        with self._timer.track():
            resp = self._client.post("/embeddings", headers=self._headers(),
                                     json={"model": self.model_id, "input": texts})
        if resp.status_code in (408, 429) or resp.status_code >= 500:
            raise _Transient(f"embedding provider returned {resp.status_code}")
        resp.raise_for_status()
        data = sorted(resp.json()["data"], key=lambda item: item["index"])
        return [np.asarray(item["embedding"], dtype=np.float64) for item in data]

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        try:
            arrays = with_retries(lambda: self._post(texts),
                                  transient=(_Transient, httpx.TransportError))
        except (_Transient, httpx.TransportError) as exc:
            raise EmbedderUnavailable(f"embedding provider failed after retries: {exc}") from exc
        return [EmbeddingVector(values=a, model_id=self.model_id) for a in arrays]


class _Transient(Exception):
    pass


class HashEmbedder:
    """Deterministic offline embedder: a hashed bag-of-words unit vector.

    Texts sharing vocabulary land near each other, which is enough to drive
    semantic chunking and retrieval in tests and stub runs. Never fails,
    never needs the network.
    """

    def __init__(self, dim: int = 64, model_id: str = "stub-hash-embedder"):
        self.dim = dim
        self.model_id = model_id

    def _vector(self, text: str) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.float64)
        for token in text.lower().split():
            h = int.from_bytes(hashlib.sha256(token.encode()).digest()[:8], "big")
            v[h % self.dim] += 1.0
        if not v.any():
            v[0] = 1.0
        return v / np.linalg.norm(v)

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        return [EmbeddingVector(values=self._vector(t), model_id=self.model_id) for t in texts]


class EmbeddingCache:
    """Per-job on-disk cache keyed by (model_id, content hash): re-runs and
    repeated chunks skip duplicate provider calls."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, model_id: str, text: str) -> Path:
        digest = hashlib.sha256(model_id.encode() + b"\x00" + text.encode()).hexdigest()
        return self.directory / f"{digest}.npy"

    def get(self, model_id: str, text: str) -> np.ndarray | None:
        path = self._path(model_id, text)
        if path.exists():
            return np.load(path)
        return None

    def put(self, model_id: str, text: str, values: np.ndarray) -> None:
        np.save(self._path(model_id, text), values)


class CachingEmbedder:
    """Wrap an embedder with an EmbeddingCache, preserving input order."""

    def __init__(self, inner, cache: EmbeddingCache):
        self.inner = inner
        self.cache = cache
        self.model_id = inner.model_id

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        out: list[EmbeddingVector | None] = []
        misses: list[tuple[int, str]] = []
        for i, text in enumerate(texts):
            hit = self.cache.get(self.model_id, text)
            if hit is None:
                misses.append((i, text))
                out.append(None)
            else:
                out.append(EmbeddingVector(values=hit, model_id=self.model_id))
        if misses:
            fresh = self.inner.embed([t for _, t in misses])
            for (i, text), vec in zip(misses, fresh):
                self.cache.put(self.model_id, text, vec.values)
                out[i] = vec
        return out  # type: ignore[return-value]


def embed_batch(embedder, texts: list[str], concurrency: int = 4,
                batch_size: int = 64) -> list[EmbeddingVector]:
    """Embed texts in order, splitting large inputs into concurrent batches."""
    if not texts:
        return []
    batches = [texts[i:i + batch_size] for i in range(0, len(texts), batch_size)]
    if len(batches) == 1 or concurrency <= 1:
        results = [embedder.embed(b) for b in batches]
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            results = list(pool.map(embedder.embed, batches))
    return [vec for batch in results for vec in batch]


class VectorIndex:
    """Exact cosine index over all child chunks of a NodeStore."""

    def __init__(self, ids: list[str], matrix: np.ndarray, embedder, model_id: str):
        self.ids = ids
        self.matrix = matrix
        self.row_norms = np.linalg.norm(matrix, axis=1) if len(ids) else np.empty(0)
        self.embedder = embedder
        self.model_id = model_id
        self._row_of = {node_id: row for row, node_id in enumerate(ids)}
        if len(ids) and not self.row_norms.all():
            raise ZeroVector("index contains a zero-norm embedding")

    @classmethod
    def build(cls, store: NodeStore, embedder, concurrency: int = 4) -> "VectorIndex":
        children = sorted(store.by_kind("child"), key=lambda n: n.id)
        vectors = embed_batch(embedder, [c.text for c in children], concurrency=concurrency)
        dims = {v.values.shape[0] for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"mixed embedding lengths in one index: {sorted(dims)}")
        matrix = (np.stack([v.values for v in vectors]) if vectors
                  else np.empty((0, 0), dtype=np.float64))
        return cls([c.id for c in children], matrix, embedder, embedder.model_id)


def retrieve(store: NodeStore, index: VectorIndex, query_text: str,
             node_filter: set[str] | None = None, top_k: int = 5) -> RetrievalResult:
    """Top-k child chunks by cosine similarity, resolved to their parents.

    ``node_filter``, when given, restricts scoring to child chunks whose id is
    in the set (section/parent ids in the set are ignored). Ties are broken by
    ascending node id; parents are deduplicated keeping best-child order.
    """
    if not index.ids:
        raise EmptyIndex("no child chunks have been indexed")
    if node_filter is not None:
        rows = np.array([index._row_of[i] for i in sorted(node_filter) if i in index._row_of],
                        dtype=np.int64)
        if rows.size == 0:
            return RetrievalResult(parent_ids=(), child_hits=())
    else:
        rows = np.arange(len(index.ids), dtype=np.int64)

    query_vec = index.embedder.embed([query_text])[0].values
    if not np.linalg.norm(query_vec):
        raise ZeroVector("query embedding has zero norm")
    if query_vec.shape[0] != index.matrix.shape[1]:
        raise DimensionMismatch("query embedding length does not match index")

    scores = kernels.cosine_scores(index.matrix, index.row_norms, np.asarray(query_vec, np.float64))
    sub = scores[rows]
    chosen = rows[kernels.top_k_desc(sub, min(top_k, rows.size))]

    child_hits = tuple((index.ids[r], float(scores[r])) for r in chosen)
    parent_ids: list[str] = []
    for child_id, _ in child_hits:
        pid = store.get(child_id).parent_id
        if pid is not None and pid not in parent_ids:
            parent_ids.append(pid)
    return RetrievalResult(parent_ids=tuple(parent_ids), child_hits=child_hits)
