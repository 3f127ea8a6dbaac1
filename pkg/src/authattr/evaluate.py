"""Chunk-averaged inference and the multi-author evaluation metrics.

A paper's chunks are scored independently and their logit vectors averaged
before the softmax. Four accuracy notions cover the multi-author setting:
top-1 membership, exact recovery given the author count, exact recovery
with an estimated count, and top-k coverage.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import ParsedPaper
from .errors import ConfigError
from .features import EmbeddingCache, embed_paper, histogram, make_encoder, strip_self_citations
from .ingest import DatasetBundle
from .model import FusionModel, forward, softmax

AUTHOR_COUNT_RATIO = 0.1
TOP_K = 5


@dataclass(frozen=True)
class PaperPrediction:
    paper_id: str
    logits: np.ndarray
    probabilities: np.ndarray
    ranked: tuple[int, ...]


@dataclass
class MetricReport:
    strata: dict[str, dict[str, float]]  # {single,multi,overall} -> m1..m4
    counts: dict[str, int]
    per_author_accuracy: dict[str, float]
    accuracy_by_papers: list[tuple[int, int, float]]  # (papers per author, n authors, mean acc)
    excluded: list[str] = field(default_factory=list)

    @property
    def m1(self) -> float:
        return self.strata["overall"]["m1"]

    @property
    def m2(self) -> float:
        return self.strata["overall"]["m2"]

    @property
    def m3(self) -> float:
        return self.strata["overall"]["m3"]

    @property
    def m4(self) -> float:
        return self.strata["overall"]["m4"]


def rank_labels(probabilities: np.ndarray) -> tuple[int, ...]:
    """Label indices by descending probability; ties by ascending index."""
    order = np.argsort(-probabilities, kind="stable")
    return tuple(int(i) for i in order)


def predict_logits(
    model: FusionModel,
    paper: ParsedPaper,
    encoder=None,
    cache: EmbeddingCache | None = None,
    first_chunk_only: bool = False,
) -> np.ndarray:
    """Mean per-chunk logits; the reference histogram is constant across a
    paper's chunks."""
    if encoder is None:
        encoder = make_encoder(model.encoder_spec)
    if not paper.chunks:
        raise ConfigError(f"paper {paper.id!r} has no chunks")
    hist = None
    if model.use_references:
        from .model import prepare_hist

        hist = prepare_hist(histogram(paper, model.vocab), model.normalize_hist)
    if model.use_content:
        embs = embed_paper(paper, encoder, cache)
        if first_chunk_only:
            embs = embs[:1]
        hists = None
        if hist is not None:
            hists = np.repeat(hist[None, :], embs.shape[0], axis=0)
        logits = forward(model, embs, hists)
        return np.asarray(logits, dtype=float).mean(axis=0)
    return np.asarray(forward(model, None, hist), dtype=float)


def predict_paper(
    model: FusionModel,
    paper: ParsedPaper,
    encoder=None,
    cache: EmbeddingCache | None = None,
    first_chunk_only: bool = False,
) -> PaperPrediction:
    logits = predict_logits(model, paper, encoder, cache, first_chunk_only)
    probs = softmax(logits)
    return PaperPrediction(paper.id, logits, probs, rank_labels(probs))


def metric1(pred: PaperPrediction, gold: set[int]) -> bool:
    """The most probable label is one of the paper's authors."""
    if not gold:
        raise ValueError("gold set is empty")
    return pred.ranked[0] in gold


def metric2(pred: PaperPrediction, gold: set[int]) -> bool:
    """Knowing n = |gold|, the top-n labels are exactly the authors."""
    if not gold:
        raise ValueError("gold set is empty")
    return set(pred.ranked[: len(gold)]) == set(gold)


def estimate_author_count(pred: PaperPrediction, ratio: float = AUTHOR_COUNT_RATIO) -> int:
    """Labels whose probability reaches ratio times the maximum count as
    predicted authors; at least one."""
    p = pred.probabilities
    return int(np.sum(p >= ratio * p.max()))


def metric3(
    pred: PaperPrediction, gold: set[int], ratio: float = AUTHOR_COUNT_RATIO
) -> bool:
    """With the author count estimated from the probability profile, the
    top-n labels are exactly the authors."""
    n_hat = estimate_author_count(pred, ratio)
    return set(pred.ranked[:n_hat]) == set(gold)


def metric4(pred: PaperPrediction, gold: set[int], k: int = TOP_K) -> bool:
    """All authors appear among the top-k predictions."""
    if k > len(pred.ranked):
        raise ValueError(f"k={k} exceeds the label space")
    return set(gold) <= set(pred.ranked[:k])


def report(
    model: FusionModel,
    bundle: DatasetBundle,
    encoder=None,
    cache: EmbeddingCache | None = None,
    first_chunk_only: bool | None = None,
    ratio: float = AUTHOR_COUNT_RATIO,
    k: int = TOP_K,
) -> MetricReport:
    """All four metrics on the test split, overall and stratified by
    single- vs multi-author gold sets, plus per-author accuracy tables."""
    if not bundle.test:
        raise ConfigError("bundle has no test samples")
    if first_chunk_only is None:
        first_chunk_only = not bundle.chunked
    if encoder is None:
        encoder = make_encoder(model.encoder_spec)
    k = min(k, model.n_labels)

    rows = []  # (gold, hits dict)
    excluded = []
    author_hits: dict[int, list[bool]] = {}
    for sample in sorted(bundle.test, key=lambda s: s.paper.id):
        paper = sample.paper
        if model.mode == "ref_no_self":
            for a in sample.labels:
                paper = strip_self_citations(paper, bundle.labels[a])
        if not paper.chunks:
            excluded.append(sample.paper.id)
            continue
        pred = predict_paper(model, paper, encoder, cache, first_chunk_only)
        gold = set(sample.labels)
        hits = {
            "m1": metric1(pred, gold),
            "m2": metric2(pred, gold),
            "m3": metric3(pred, gold, ratio),
            "m4": metric4(pred, gold, k),
        }
        rows.append((gold, hits))
        for a in gold:
            author_hits.setdefault(a, []).append(hits["m1"])

    def summarize(selected) -> dict[str, float]:
        if not selected:
            return {m: float("nan") for m in ("m1", "m2", "m3", "m4")}
        return {
            m: sum(h[m] for _, h in selected) / len(selected)
            for m in ("m1", "m2", "m3", "m4")
        }

    single = [(g, h) for g, h in rows if len(g) == 1]
    multi = [(g, h) for g, h in rows if len(g) >= 2]
    strata = {
        "single": summarize(single),
        "multi": summarize(multi),
        "overall": summarize(rows),
    }

    per_author = {
        bundle.labels[a].canonical_name: sum(hs) / len(hs)
        for a, hs in sorted(author_hits.items())
    }

    # Accuracy as a function of papers available per author.
    by_count: dict[int, list[float]] = {}
    for a, hs in author_hits.items():
        n_papers = bundle.labels[a].paper_count
        by_count.setdefault(n_papers, []).append(sum(hs) / len(hs))
    accuracy_by_papers = [
        (n, len(accs), float(np.mean(accs))) for n, accs in sorted(by_count.items())
    ]

    return MetricReport(
        strata=strata,
        counts={"single": len(single), "multi": len(multi), "overall": len(rows)},
        per_author_accuracy=per_author,
        accuracy_by_papers=accuracy_by_papers,
        excluded=excluded,
    )


# ---------------------------------------------------------------------------
# Report serialization


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else f"{100.0 * x:5.1f}"


def render_report(rep: MetricReport, title: str) -> str:
    lines = [
        f"Evaluation: {title}",
        "",
        f"{'':10s}{'Metric 1':>10s}{'Metric 2':>10s}{'Metric 3':>10s}{'Metric 4':>10s}{'Papers':>10s}",
    ]
    for stratum in ("single", "multi", "overall"):
        row = rep.strata[stratum]
        lines.append(
            f"{stratum:10s}"
            + "".join(f"{_fmt(row[m]):>10s}" for m in ("m1", "m2", "m3", "m4"))
            + f"{rep.counts[stratum]:>10d}"
        )
    if rep.excluded:
        lines.append("")
        lines.append(f"excluded papers (no chunks): {len(rep.excluded)}")
    lines.append("")
    return "\n".join(lines)


def write_report(rep: MetricReport, directory: str | Path, title: str) -> Path:
    """Emit report.txt / report.json plus the CSV tables behind the
    accuracy-distribution and accuracy-vs-papers analyses."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    (directory / "report.txt").write_text(render_report(rep, title), encoding="utf-8")
    payload = {
        "title": title,
        "strata": {
            stratum: {m: (None if not np.isfinite(v) else v) for m, v in row.items()}
            for stratum, row in rep.strata.items()
        },
        "counts": rep.counts,
        "excluded": rep.excluded,
    }
    (directory / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    with (directory / "per_author_accuracy.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["author", "accuracy"])
        for name, acc in sorted(rep.per_author_accuracy.items()):
            w.writerow([name, f"{acc:.6f}"])

    # Histogram bins of the per-author accuracy distribution.
    with (directory / "accuracy_histogram.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_low", "bin_high", "n_authors"])
        accs = list(rep.per_author_accuracy.values())
        edges = np.linspace(0.0, 1.0, 26)
        counts, _ = np.histogram(accs, bins=edges)
        for lo, hi, n in zip(edges[:-1], edges[1:], counts):
            w.writerow([f"{lo:.2f}", f"{hi:.2f}", int(n)])

    with (directory / "accuracy_by_papers.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["papers_per_author", "n_authors", "mean_accuracy"])
        for n, count, acc in rep.accuracy_by_papers:
            w.writerow([n, count, f"{acc:.6f}"])

    return directory
