"""Reference-histogram features and the pluggable text encoder.

The histogram path counts vocabulary surnames in a paper's bibliography and
compresses the counts with a small two-layer network. The text path is an
encoder interface with two implementations: a self-contained hashed n-gram
encoder, and a client for the out-of-process transformer sidecar.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import ParsedPaper
from .errors import ConfigError
from .ingest import AuthorLabel
from .preprocess import ContentChunk

RHE_OUTPUT_DIM = 128
DEFAULT_MIN_COUNT = 50
NATIVE_DIM = 256
NATIVE_SEED = 7


@dataclass(frozen=True)
class CitationVocab:
    """Surnames cited strictly more than min_count times in the train split,
    ordered by descending count then lexicographically."""

    surnames: tuple[str, ...]
    counts: tuple[int, ...]
    min_count: int

    @property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.surnames)}

    def __len__(self) -> int:
        return len(self.surnames)


def build_vocab(
    train_papers: list[ParsedPaper], min_count: int = DEFAULT_MIN_COUNT
) -> CitationVocab:
    """Count cited surnames over the train split and keep the frequent ones.

    Must only ever see the train split; the test split leaking in here would
    leak test citations into the feature space.
    """
    totals: dict[str, int] = {}
    for paper in train_papers:
        for ref in paper.references:
            for s in ref.surnames:
                totals[s] = totals.get(s, 0) + 1
    kept = [(s, c) for s, c in totals.items() if c > min_count]
    kept.sort(key=lambda sc: (-sc[1], sc[0]))
    return CitationVocab(
        surnames=tuple(s for s, _ in kept),
        counts=tuple(c for _, c in kept),
        min_count=min_count,
    )


def save_vocab(vocab: CitationVocab, path: str | Path) -> None:
    lines = [f"# min_count={vocab.min_count}"]
    lines += [f"{s} {c}" for s, c in zip(vocab.surnames, vocab.counts)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vocab(path: str | Path) -> CitationVocab:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# min_count="):
        raise ValueError(f"{path}: not a vocabulary file")
    min_count = int(lines[0].split("=", 1)[1])
    surnames, counts = [], []
    for line in lines[1:]:
        if not line.strip():
            continue
        s, c = line.rsplit(" ", 1)
        surnames.append(s)
        counts.append(int(c))
    return CitationVocab(tuple(surnames), tuple(counts), min_count)


def histogram(paper: ParsedPaper, vocab: CitationVocab) -> np.ndarray:
    """Occurrences of each vocabulary surname in the paper's references."""
    counts = np.zeros(len(vocab), dtype=np.int64)
    index = vocab.index
    for ref in paper.references:
        for s in ref.surnames:
            i = index.get(s)
            if i is not None:
                counts[i] += 1
    return counts


def strip_self_citations(paper: ParsedPaper, candidate_author: AuthorLabel) -> ParsedPaper:
    """Remove references citing the candidate author's surname."""
    surname = candidate_author.surname
    kept = tuple(r for r in paper.references if surname not in r.surnames)
    return replace(paper, references=kept)


def self_citation_fraction(
    papers: list[tuple[ParsedPaper, list[AuthorLabel]]]
) -> float:
    """Corpus-average fraction of references citing one of the paper's own
    authors. Papers without references are skipped."""
    fractions = []
    for paper, authors in papers:
        if not paper.references:
            continue
        surnames = {a.surname for a in authors}
        self_refs = sum(
            1 for r in paper.references if surnames.intersection(r.surnames)
        )
        fractions.append(self_refs / len(paper.references))
    if not fractions:
        return 0.0
    return float(np.mean(fractions))


# ---------------------------------------------------------------------------
# Reference-histogram compression network


def rhe_layer_sizes(n_hist: int) -> tuple[int, int, int]:
    """Input, middle and output widths of the histogram compressor; the
    middle layer floors (n_hist + 128) / 2 for odd sums."""
    return n_hist, (n_hist + RHE_OUTPUT_DIM) // 2, RHE_OUTPUT_DIM


@dataclass
class RheParams:
    w1: np.ndarray  # (n_hist, mid)
    b1: np.ndarray  # (mid,)
    w2: np.ndarray  # (mid, 128)
    b2: np.ndarray  # (128,)

    @classmethod
    def init(cls, n_hist: int, rng: np.random.Generator) -> "RheParams":
        n, mid, out = rhe_layer_sizes(n_hist)
        return cls(
            w1=_fan_in_uniform(rng, (n, mid)),
            b1=np.zeros(mid),
            w2=_fan_in_uniform(rng, (mid, out)),
            b2=np.zeros(out),
        )


def _fan_in_uniform(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    fan_in = max(1, shape[0])
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def rhe_forward(hist: np.ndarray, params: RheParams) -> np.ndarray:
    """Two affine layers with a ReLU between; accepts (n,) or (batch, n)."""
    x = np.asarray(hist, dtype=float)
    n, mid, out = params.w1.shape[0], params.w1.shape[1], params.w2.shape[1]
    if x.shape[-1] != n or params.w2.shape[0] != mid or params.b2.shape[0] != out:
        raise ConfigError(
            f"histogram of width {x.shape[-1]} does not fit parameters "
            f"{params.w1.shape} -> {params.w2.shape}"
        )
    h = np.maximum(x @ params.w1 + params.b1, 0.0)
    return h @ params.w2 + params.b2


# ---------------------------------------------------------------------------
# Text encoders


@dataclass(frozen=True)
class TextEmbedding:
    vector: np.ndarray


class NativeEncoder:
    """Self-contained hashed n-gram encoder.

    Word unigrams and character trigrams of the chunk text are hashed into
    ``dim`` buckets with log-tf weights, then L2-normalized. Deterministic
    for a given (text, seed); no external model involved.
    """

    kind = "native"

    def __init__(self, dim: int = NATIVE_DIM, seed: int = NATIVE_SEED, trigrams: bool = True):
        if dim < 1:
            raise ConfigError("encoder dimension must be >= 1")
        self.dim = dim
        self.seed = seed
        self.trigrams = trigrams

    @property
    def encoder_id(self) -> str:
        tri = "tri" if self.trigrams else "uni"
        return f"native-{self.dim}-{self.seed}-{tri}"

    def _bucket(self, kind: str, value: str) -> int:
        digest = hashlib.sha256(f"{self.seed}|{kind}|{value}".encode()).digest()
        return int.from_bytes(digest[:8], "big") % self.dim

    def encode_tokens(self, tokens: tuple[str, ...] | list[str]) -> TextEmbedding:
        counts: dict[tuple[str, str], int] = {}
        for tok in tokens:
            key = ("w", tok)
            counts[key] = counts.get(key, 0) + 1
        if self.trigrams:
            text = " ".join(tokens)
            for i in range(len(text) - 2):
                key = ("t", text[i : i + 3])
                counts[key] = counts.get(key, 0) + 1
        vec = np.zeros(self.dim)
        for (kind, value), tf in counts.items():
            vec[self._bucket(kind, value)] += 1.0 + math.log(tf)
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return TextEmbedding(vec)

    def encode(self, chunk: ContentChunk) -> TextEmbedding:
        return self.encode_tokens(chunk.words)

    def encode_text(self, text: str) -> TextEmbedding:
        return self.encode_tokens(tuple(text.split()))

    def spec(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "seed": self.seed,
            "trigrams": self.trigrams,
        }


def make_encoder(spec: dict):
    """Rebuild an encoder from its checkpointed spec."""
    kind = spec.get("kind")
    if kind == "native":
        return NativeEncoder(
            dim=int(spec["dim"]),
            seed=int(spec["seed"]),
            trigrams=bool(spec.get("trigrams", True)),
        )
    if kind == "sidecar":
        from .sidecar_client import SidecarEncoder

        return SidecarEncoder(endpoint=spec["endpoint"])
    raise ConfigError(f"unknown encoder kind {kind!r}")


def encode_text(chunk: ContentChunk, encoder) -> TextEmbedding:
    """Encode one content chunk with the active encoder."""
    emb = encoder.encode(chunk)
    v = np.asarray(emb.vector, dtype=float)
    if v.shape != (encoder.dim,) or not np.all(np.isfinite(v)):
        raise ConfigError(
            f"encoder {encoder.encoder_id} returned an invalid vector"
        )
    return TextEmbedding(v)


# ---------------------------------------------------------------------------
# Embedding cache


class EmbeddingCache:
    """Columnar on-disk cache keyed by (paper_id, chunk_index, encoder_id).

    Stored as a float32 matrix (.npy) plus a JSON key file next to it.
    """

    def __init__(self):
        self._store: dict[tuple[str, int, str], np.ndarray] = {}

    def get(self, paper_id: str, chunk_index: int, encoder_id: str) -> np.ndarray | None:
        return self._store.get((paper_id, chunk_index, encoder_id))

    def put(
        self, paper_id: str, chunk_index: int, encoder_id: str, vector: np.ndarray
    ) -> None:
        self._store[(paper_id, chunk_index, encoder_id)] = np.asarray(
            vector, dtype=np.float32
        )

    def __len__(self) -> int:
        return len(self._store)

    def save(self, path: str | Path) -> None:
        import json

        path = Path(path)
        keys = sorted(self._store)
        if keys:
            matrix = np.stack([self._store[k] for k in keys]).astype(np.float32)
        else:
            matrix = np.zeros((0, 0), dtype=np.float32)
        np.save(path.with_suffix(".npy"), matrix)
        path.with_suffix(".keys.json").write_text(
            json.dumps([[p, i, e] for p, i, e in keys]) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingCache":
        import json

        path = Path(path)
        cache = cls()
        matrix = np.load(path.with_suffix(".npy"))
        keys = json.loads(path.with_suffix(".keys.json").read_text(encoding="utf-8"))
        for (p, i, e), row in zip(keys, matrix):
            cache.put(p, int(i), e, row)
        return cache


def embed_paper(
    paper: ParsedPaper, encoder, cache: EmbeddingCache | None = None
) -> np.ndarray:
    """Embeddings for all chunks of a paper, shape (n_chunks, dim)."""
    rows = []
    for chunk in paper.chunks:
        vec = None
        if cache is not None:
            vec = cache.get(paper.id, chunk.index, encoder.encoder_id)
        if vec is None:
            # stored and served as float32 so cached and fresh runs are
            # bit-identical
            vec = encode_text(chunk, encoder).vector.astype(np.float32)
            if cache is not None:
                cache.put(paper.id, chunk.index, encoder.encoder_id, vec)
        rows.append(np.asarray(vec, dtype=float))
    if not rows:
        return np.zeros((0, encoder.dim))
    return np.stack(rows)
