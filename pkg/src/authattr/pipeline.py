"""End-to-end dataset construction from a raw corpus.

Chains the preprocessing, reference parsing, ambiguity filtering and
splitting stages, collecting per-stage drop reasons for the manifest.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .corpus import Manuscript, ParsedPaper
from .disambig import DEFAULT_EPS, DEFAULT_MIN_PTS, AbstractEmbedding, verdict
from .errors import DropPaper
from .ingest import (
    AuthorLabel,
    DatasetBundle,
    filter_full_names,
    select_authors,
    split_dataset,
    trim_dataset,
)
from .preprocess import chunk, clean_lines, segment, select_chunks
from .refparse import parse_block


def process_manuscript(m: Manuscript) -> ParsedPaper:
    """Segment, chunk and parse one manuscript; raises DropPaper on any
    fail-fast stage."""
    cleaned = clean_lines(m.raw_text)
    seg = segment(cleaned)
    chunks = select_chunks(chunk(seg.content))
    references = parse_block(seg.references_block)
    return ParsedPaper(id=m.id, chunks=tuple(chunks), references=tuple(references))


def process_corpus(
    corpus: list[Manuscript], workers: int = 1
) -> tuple[dict[str, ParsedPaper], list[dict]]:
    """Parse every manuscript; returns (papers by id, drop records).

    Results are merged in paper-id order, so the outcome does not depend on
    the worker count.
    """

    def one(m: Manuscript):
        try:
            return m.id, process_manuscript(m), None
        except DropPaper as exc:
            return m.id, None, {"id": m.id, "stage": exc.stage, "reason": exc.reason}

    if workers <= 1:
        results = [one(m) for m in corpus]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, corpus))
    results.sort(key=lambda r: r[0])
    papers = {pid: paper for pid, paper, _ in results if paper is not None}
    drops = [drop for _, _, drop in results if drop is not None]
    return papers, drops


def build_dataset(
    corpus: list[Manuscript],
    min_papers: int,
    encoder,
    seed: int = 0,
    chunked: bool = False,
    trim: int | None = None,
    ratio: float = 0.2,
    workers: int = 1,
    eps: float = DEFAULT_EPS,
    min_pts: int = DEFAULT_MIN_PTS,
) -> tuple[DatasetBundle, dict]:
    """The full pipeline: name filtering, author thresholding, per-paper
    parsing, ambiguity discarding, stratified splitting, optional trimming.

    Returns the bundle plus manifest extras (drop records, ambiguity
    verdicts, stage counts).
    """
    named = filter_full_names(corpus)
    named_ids = {m.id for m in named}
    name_drops = [
        {"id": m.id, "stage": "names", "reason": "author with initials only"}
        for m in corpus
        if m.id not in named_ids
    ]

    candidates = select_authors(named, min_papers)
    if not candidates:
        raise DropPaper("ingest", "no authors met threshold")
    candidate_names = {a.canonical_name for a in candidates}

    relevant = [m for m in named if candidate_names.intersection(m.authors)]
    papers, parse_drops = process_corpus(relevant, workers)

    # Ambiguity check on the abstracts of each candidate's surviving papers.
    by_author: dict[str, list[Manuscript]] = {name: [] for name in candidate_names}
    for m in relevant:
        if m.id not in papers:
            continue
        for name in m.authors:
            if name in candidate_names:
                by_author[name].append(m)

    verdicts = {}
    kept_labels: list[AuthorLabel] = []
    for author in candidates:
        mss = by_author[author.canonical_name]
        embs = [
            AbstractEmbedding(m.id, encoder.encode_text(m.abstract).vector)
            for m in mss
            if m.abstract.strip()
        ]
        v = verdict(author, embs, eps=eps, min_pts=min_pts)
        verdicts[author.canonical_name] = {
            "kept": v.unique_person,
            "n_clusters": v.n_clusters,
            "n_noise": v.n_noise,
        }
        if v.unique_person and mss:
            kept_labels.append(author)

    if not kept_labels:
        raise DropPaper("disambig", "no unambiguous authors survived")

    label_index = {a.canonical_name: i for i, a in enumerate(kept_labels)}
    labeled: list[tuple[ParsedPaper, set[int]]] = []
    for m in relevant:
        if m.id not in papers:
            continue
        labels = {label_index[n] for n in m.authors if n in label_index}
        if labels:
            labeled.append((papers[m.id], labels))

    name = f"D{min_papers}" + ("-C" if chunked else "")
    bundle = split_dataset(labeled, kept_labels, ratio, seed, name, chunked)
    if trim is not None:
        bundle = trim_dataset(bundle, trim, seed)

    extras = {
        "drops": sorted(name_drops + parse_drops, key=lambda d: d["id"]),
        "disambig": dict(sorted(verdicts.items())),
        "stage_counts": {
            "input": len(corpus),
            "after_name_filter": len(named),
            "candidate_authors": len(candidates),
            "relevant_manuscripts": len(relevant),
            "parsed": len(papers),
            "kept_authors": len(kept_labels),
            "labeled_papers": len(labeled),
        },
    }
    return bundle, extras
