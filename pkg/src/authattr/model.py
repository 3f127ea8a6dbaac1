"""Fusion classifier: text features and reference histograms, concatenated
and fed to a two-layer head producing per-author logits.

Implemented directly on numpy with hand-written backprop and Adam. The four
training modes (content, references, ref_no_self, ref_cont) share one
architecture; an absent modality contributes a zero feature vector and its
parameters receive zero gradients.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericError
from .features import (
    CitationVocab,
    EmbeddingCache,
    RHE_OUTPUT_DIM,
    RheParams,
    _fan_in_uniform,
    build_vocab,
    embed_paper,
    histogram,
    strip_self_citations,
)
from .ingest import AuthorLabel, DatasetBundle

MODES = ("content", "references", "ref_no_self", "ref_cont")
DEFAULT_HIDDEN = 512
DEFAULT_BATCH_SIZE = 32
CHECKPOINT_MAGIC = b"AATR"
CHECKPOINT_VERSION = 1


def mode_uses(mode: str) -> tuple[bool, bool]:
    """(use_content, use_references) for a training mode."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    use_content = mode in ("content", "ref_cont")
    use_references = mode in ("references", "ref_no_self", "ref_cont")
    return use_content, use_references


def default_learning_rate(mode: str, chunked: bool) -> float:
    """Per-mode defaults from the reference training configuration."""
    if mode == "content":
        return 1e-4
    if mode in ("references", "ref_no_self"):
        return 8e-4
    if mode == "ref_cont":
        return 5e-5 if chunked else 3e-4
    raise ConfigError(f"unknown mode {mode!r}")


DEFAULT_EPOCHS = 10


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    mode: str
    seed: int = 0
    batch_size: int = DEFAULT_BATCH_SIZE
    normalize_hist: bool = False  # L1-normalize histograms before the MLP

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        mode_uses(self.mode)


@dataclass
class FusionModel:
    mode: str
    d_text: int
    hidden: int
    labels: list[AuthorLabel]
    vocab: CitationVocab
    encoder_spec: dict
    rhe: RheParams
    proj_w: np.ndarray  # (d_text, d_text)
    proj_b: np.ndarray  # (d_text,)
    head_w1: np.ndarray  # (d_text + 128, hidden)
    head_b1: np.ndarray  # (hidden,)
    head_w2: np.ndarray  # (hidden, n_labels)
    head_b2: np.ndarray  # (n_labels,)
    history: list[float] = field(default_factory=list)
    normalize_hist: bool = False

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    @property
    def use_content(self) -> bool:
        return mode_uses(self.mode)[0]

    @property
    def use_references(self) -> bool:
        return mode_uses(self.mode)[1]

    def params(self) -> dict[str, np.ndarray]:
        return {
            "proj_w": self.proj_w,
            "proj_b": self.proj_b,
            "rhe_w1": self.rhe.w1,
            "rhe_b1": self.rhe.b1,
            "rhe_w2": self.rhe.w2,
            "rhe_b2": self.rhe.b2,
            "head_w1": self.head_w1,
            "head_b1": self.head_b1,
            "head_w2": self.head_w2,
            "head_b2": self.head_b2,
        }


def init_model(
    mode: str,
    labels: list[AuthorLabel],
    vocab: CitationVocab,
    encoder_spec: dict,
    d_text: int,
    seed: int,
    hidden: int = DEFAULT_HIDDEN,
) -> FusionModel:
    if not labels:
        raise ConfigError("label space is empty")
    mode_uses(mode)
    rng = np.random.default_rng(seed)
    d_in = d_text + RHE_OUTPUT_DIM
    return FusionModel(
        mode=mode,
        d_text=d_text,
        hidden=hidden,
        labels=list(labels),
        vocab=vocab,
        encoder_spec=dict(encoder_spec),
        rhe=RheParams.init(len(vocab), rng),
        proj_w=_fan_in_uniform(rng, (d_text, d_text)),
        proj_b=np.zeros(d_text),
        head_w1=_fan_in_uniform(rng, (d_in, hidden)),
        head_b1=np.zeros(hidden),
        head_w2=_fan_in_uniform(rng, (hidden, len(labels))),
        head_b2=np.zeros(len(labels)),
    )


def prepare_hist(hist: np.ndarray, normalize: bool) -> np.ndarray:
    """Optionally L1-normalize histogram counts; zero histograms stay zero."""
    h = np.asarray(hist, dtype=float)
    if not normalize:
        return h
    total = h.sum(axis=-1, keepdims=True)
    return np.divide(h, total, out=np.zeros_like(h), where=total > 0)


def _as_batch(x: np.ndarray | None, width: int, n: int) -> np.ndarray:
    if x is None:
        return np.zeros((n, width))
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != width:
        raise ConfigError(f"expected width {width}, got {x.shape[1]}")
    return x


def forward(
    model: FusionModel,
    text_emb: np.ndarray | None,
    hist: np.ndarray | None,
) -> np.ndarray:
    """Logits for one sample or a batch. A modality that is switched off by
    the mode is replaced by a zero feature vector; passing None does the
    same explicitly."""
    if not model.use_content and not model.use_references:
        raise ConfigError("model must use at least one modality")
    n = 1
    for x in (text_emb, hist):
        if x is not None and np.asarray(x).ndim == 2:
            n = np.asarray(x).shape[0]
    squeeze = (text_emb is None or np.asarray(text_emb).ndim == 1) and (
        hist is None or np.asarray(hist).ndim == 1
    )

    if model.use_content:
        xt = _as_batch(text_emb, model.d_text, n)
        text_feat = xt @ model.proj_w + model.proj_b
    else:
        text_feat = np.zeros((n, model.d_text))
    if model.use_references:
        xh = _as_batch(hist, len(model.vocab), n)
        h_pre = xh @ model.rhe.w1 + model.rhe.b1
        ref_feat = np.maximum(h_pre, 0.0) @ model.rhe.w2 + model.rhe.b2
    else:
        ref_feat = np.zeros((n, RHE_OUTPUT_DIM))

    z = np.concatenate([text_feat, ref_feat], axis=1)
    hid = np.maximum(z @ model.head_w1 + model.head_b1, 0.0)
    logits = hid @ model.head_w2 + model.head_b2
    if not np.all(np.isfinite(logits)):
        raise NumericError("non-finite logits")
    return logits[0] if squeeze else logits


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def loss(logits: np.ndarray, label_index: int) -> float:
    """Softmax cross-entropy of one logit vector against one label."""
    logits = np.asarray(logits, dtype=float)
    if not 0 <= label_index < logits.shape[-1]:
        raise ConfigError(f"label index {label_index} out of range")
    return float(-log_softmax(logits)[label_index])


def gradients(
    model: FusionModel,
    x_text: np.ndarray,
    x_hist: np.ndarray,
    y: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean loss over a batch and its exact parameter gradients.

    Parameters of a masked modality get zero gradients.
    """
    y = np.asarray(y, dtype=int)
    n = y.shape[0]
    if n == 0:
        raise ConfigError("empty batch")
    xt = _as_batch(x_text if model.use_content else None, model.d_text, n)
    xh = _as_batch(x_hist if model.use_references else None, len(model.vocab), n)

    if model.use_content:
        text_feat = xt @ model.proj_w + model.proj_b
    else:
        text_feat = np.zeros((n, model.d_text))
    if model.use_references:
        r_pre = xh @ model.rhe.w1 + model.rhe.b1
        r_hid = np.maximum(r_pre, 0.0)
        ref_feat = r_hid @ model.rhe.w2 + model.rhe.b2
    else:
        ref_feat = np.zeros((n, RHE_OUTPUT_DIM))

    z = np.concatenate([text_feat, ref_feat], axis=1)
    h_pre = z @ model.head_w1 + model.head_b1
    hid = np.maximum(h_pre, 0.0)
    logits = hid @ model.head_w2 + model.head_b2

    logp = log_softmax(logits)
    mean_loss = float(-logp[np.arange(n), y].mean())
    probs = np.exp(logp)

    dlogits = probs
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    grads = {k: np.zeros_like(v) for k, v in model.params().items()}
    grads["head_w2"] = hid.T @ dlogits
    grads["head_b2"] = dlogits.sum(axis=0)
    dhid = dlogits @ model.head_w2.T
    dh_pre = dhid * (h_pre > 0)
    grads["head_w1"] = z.T @ dh_pre
    grads["head_b1"] = dh_pre.sum(axis=0)
    dz = dh_pre @ model.head_w1.T
    dtext_feat = dz[:, : model.d_text]
    dref_feat = dz[:, model.d_text :]

    if model.use_content:
        grads["proj_w"] = xt.T @ dtext_feat
        grads["proj_b"] = dtext_feat.sum(axis=0)
    if model.use_references:
        grads["rhe_w2"] = r_hid.T @ dref_feat
        grads["rhe_b2"] = dref_feat.sum(axis=0)
        dr_hid = dref_feat @ model.rhe.w2.T
        dr_pre = dr_hid * (r_pre > 0)
        grads["rhe_w1"] = xh.T @ dr_pre
        grads["rhe_b1"] = dr_pre.sum(axis=0)
    return mean_loss, grads


class Adam:
    """Standard Adam update (b1=0.9, b2=0.999, eps=1e-8)."""

    def __init__(self, params: dict[str, np.ndarray], lr: float):
        self.lr = lr
        self.b1, self.b2, self.eps = 0.9, 0.999, 1e-8
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for k, p in params.items():
            g = grads[k]
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            m_hat = self.m[k] / (1 - self.b1**self.t)
            v_hat = self.v[k] / (1 - self.b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def featurize_bundle(
    bundle: DatasetBundle,
    mode: str,
    encoder,
    vocab: CitationVocab,
    cache: EmbeddingCache | None = None,
    normalize_hist: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Training matrices (x_text, x_hist, y) from a bundle's train split.

    Chunked bundles yield one row per surviving chunk in content modes; the
    reference histogram is constant across a paper's chunks. Reference-only
    modes use one row per paper. ref_no_self strips citations to each
    sample's gold authors before counting.
    """
    use_content, use_references = mode_uses(mode)
    rows_t, rows_h, ys = [], [], []
    for sample in bundle.train:
        paper = sample.paper
        if mode == "ref_no_self":
            for a in sample.gold:
                paper = strip_self_citations(paper, bundle.labels[a])
        hist = (
            prepare_hist(histogram(paper, vocab), normalize_hist)
            if use_references
            else None
        )
        if use_content:
            embs = embed_paper(sample.paper, encoder, cache)
            if not bundle.chunked:
                embs = embs[:1]
            for row in embs:
                rows_t.append(row)
                rows_h.append(hist if hist is not None else np.zeros(0))
                ys.append(sample.label)
        else:
            rows_t.append(np.zeros(encoder.dim))
            rows_h.append(hist)
            ys.append(sample.label)
    x_text = np.stack(rows_t) if rows_t else np.zeros((0, encoder.dim))
    width = len(vocab) if use_references else 0
    x_hist = (
        np.stack([np.asarray(h, dtype=float) for h in rows_h])
        if use_references
        else np.zeros((len(ys), width))
    )
    return x_text, x_hist, np.asarray(ys, dtype=int)


def train(
    bundle: DatasetBundle,
    cfg: TrainConfig,
    encoder=None,
    cache: EmbeddingCache | None = None,
    hidden: int = DEFAULT_HIDDEN,
    init_from: "FusionModel | None" = None,
    vocab_min_count: int | None = None,
) -> FusionModel:
    """Minibatch Adam over the bundle's train split.

    Deterministic for a given (bundle, cfg, encoder). Aborts with
    NumericError when the loss goes non-finite.
    """
    if encoder is None:
        from .features import NativeEncoder

        encoder = NativeEncoder()
    if not bundle.train:
        raise ConfigError("bundle has no training samples")

    if init_from is not None:
        model = init_from
        if model.mode != cfg.mode:
            raise ConfigError(
                f"resume checkpoint was trained in mode {model.mode!r}, not {cfg.mode!r}"
            )
        if [l.canonical_name for l in model.labels] != [
            l.canonical_name for l in bundle.labels
        ]:
            raise ConfigError("resume checkpoint label space does not match the bundle")
        vocab = model.vocab
    else:
        from .features import DEFAULT_MIN_COUNT

        min_count = DEFAULT_MIN_COUNT if vocab_min_count is None else vocab_min_count
        vocab = build_vocab([s.paper for s in bundle.train], min_count)
        model = init_model(
            cfg.mode, bundle.labels, vocab, encoder.spec(), encoder.dim, cfg.seed, hidden
        )
        model.normalize_hist = cfg.normalize_hist
    x_text, x_hist, y = featurize_bundle(
        bundle, cfg.mode, encoder, vocab, cache, model.normalize_hist
    )

    params = model.params()
    opt = Adam(params, cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    n = y.shape[0]
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch_loss, grads = gradients(model, x_text[idx], x_hist[idx], y[idx])
            if not np.isfinite(batch_loss):
                raise NumericError(
                    f"non-finite loss at epoch {_epoch}; lower the learning rate"
                )
            opt.step(params, grads)
            epoch_loss += batch_loss * len(idx)
        model.history.append(epoch_loss / n)
    return model


# ---------------------------------------------------------------------------
# Checkpoints: versioned binary with deterministic bytes.


def save_checkpoint(model: FusionModel, path: str | Path) -> None:
    header = {
        "version": CHECKPOINT_VERSION,
        "mode": model.mode,
        "d_text": model.d_text,
        "hidden": model.hidden,
        "labels": [
            [l.canonical_name, l.cluster_index, l.paper_count] for l in model.labels
        ],
        "vocab": {
            "surnames": list(model.vocab.surnames),
            "counts": list(model.vocab.counts),
            "min_count": model.vocab.min_count,
        },
        "encoder": model.encoder_spec,
        "history": model.history,
        "normalize_hist": model.normalize_hist,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    tensors = model.params()
    with Path(path).open("wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack(">I", CHECKPOINT_VERSION))
        fh.write(struct.pack(">I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack(">I", len(tensors)))
        for name in sorted(tensors):
            arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
            nb = name.encode("utf-8")
            fh.write(struct.pack(">I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack(">I", arr.ndim))
            for d in arr.shape:
                fh.write(struct.pack(">Q", d))
            fh.write(arr.tobytes())


def load_checkpoint(path: str | Path) -> FusionModel:
    with Path(path).open("rb") as fh:
        if fh.read(4) != CHECKPOINT_MAGIC:
            raise ConfigError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack(">I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise ConfigError(f"{path}: unsupported checkpoint version {version}")
        (blob_len,) = struct.unpack(">I", fh.read(4))
        header = json.loads(fh.read(blob_len).decode("utf-8"))
        (n_tensors,) = struct.unpack(">I", fh.read(4))
        tensors: dict[str, np.ndarray] = {}
        for _ in range(n_tensors):
            (name_len,) = struct.unpack(">I", fh.read(4))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack(">I", fh.read(4))
            shape = tuple(
                struct.unpack(">Q", fh.read(8))[0] for _ in range(ndim)
            )
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(count * 8), dtype=np.float64)
            tensors[name] = data.reshape(shape).copy()

    vocab = CitationVocab(
        tuple(header["vocab"]["surnames"]),
        tuple(header["vocab"]["counts"]),
        header["vocab"]["min_count"],
    )
    labels = [AuthorLabel(n, c, p) for n, c, p in header["labels"]]
    rhe = RheParams(
        w1=tensors["rhe_w1"],
        b1=tensors["rhe_b1"],
        w2=tensors["rhe_w2"],
        b2=tensors["rhe_b2"],
    )
    return FusionModel(
        mode=header["mode"],
        d_text=header["d_text"],
        hidden=header["hidden"],
        labels=labels,
        vocab=vocab,
        encoder_spec=header["encoder"],
        rhe=rhe,
        proj_w=tensors["proj_w"],
        proj_b=tensors["proj_b"],
        head_w1=tensors["head_w1"],
        head_b1=tensors["head_b1"],
        head_w2=tensors["head_w2"],
        head_b2=tensors["head_b2"],
        history=list(header["history"]),
        normalize_hist=bool(header.get("normalize_hist", False)),
    )
