"""Dataset construction: author thresholding, stratified splitting, trimming.

All operations are pure functions of their inputs and a seed. Papers are
processed in stable id order so results do not depend on corpus ordering.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import Manuscript, ParsedPaper, load_paper, save_paper

_INITIAL_RE = re.compile(r"^[A-Za-z]\.?$")

BUNDLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class AuthorLabel:
    canonical_name: str
    cluster_index: int = 0
    paper_count: int = 1

    @property
    def surname(self) -> str:
        return self.canonical_name.split()[-1].lower()


@dataclass(frozen=True)
class TrainSample:
    paper: ParsedPaper
    label: int
    gold: tuple[int, ...]  # full label set, kept for trimming / ablations


@dataclass(frozen=True)
class TestSample:
    paper: ParsedPaper
    labels: tuple[int, ...]


@dataclass
class DatasetBundle:
    name: str
    labels: list[AuthorLabel]
    train: list[TrainSample]
    test: list[TestSample]
    chunked: bool
    seed: int
    ratio_drift: dict[str, tuple[int, int, int]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def select_authors(corpus: list[Manuscript], min_papers: int) -> list[AuthorLabel]:
    """Authors appearing on at least ``min_papers`` manuscripts, co-authors
    counted equally. Ordered by descending count, then name."""
    if min_papers < 1:
        raise ValueError("min_papers must be >= 1")
    counts: dict[str, int] = {}
    for m in corpus:
        for name in set(m.authors):
            counts[name] = counts.get(name, 0) + 1
    selected = [(n, c) for n, c in counts.items() if c >= min_papers]
    selected.sort(key=lambda nc: (-nc[1], nc[0]))
    return [AuthorLabel(name, 0, count) for name, count in selected]


def _has_initials_only_author(m: Manuscript) -> bool:
    for name in m.authors:
        given = name.split()[:-1]
        if given and all(_INITIAL_RE.match(tok) for tok in given):
            return True
    return False


def filter_full_names(corpus: list[Manuscript]) -> list[Manuscript]:
    """Drop manuscripts where any author gave only initials for the given
    name. Surnames are never tested."""
    return [m for m in corpus if not _has_initials_only_author(m)]


def _ratio_window(n: int, ratio: float) -> tuple[int, int]:
    return math.floor(ratio * n), math.ceil(ratio * n)


def _hash_pick(paper_id: str, seed: int, options: list[int]) -> int:
    """Stable pseudo-random choice keyed on (paper id, seed): reordering the
    corpus never changes which label a train paper is assigned to."""
    digest = hashlib.sha256(f"{paper_id}|{seed}".encode()).digest()
    return options[int.from_bytes(digest[:8], "big") % len(options)]


class _SideAssigner:
    """Greedy stratified assignment with a min-conflicts repair loop."""

    def __init__(
        self,
        gold: dict[str, frozenset[int]],
        ratio: float,
        rng: random.Random,
        pinned_train: set[str],
        initial_test: set[str] | None = None,
    ):
        self.gold = gold
        self.ratio = ratio
        self.rng = rng
        self.pinned = pinned_train
        self.paper_ids = sorted(gold)
        self.by_author: dict[int, list[str]] = {}
        for pid in self.paper_ids:
            for a in gold[pid]:
                self.by_author.setdefault(a, []).append(pid)
        self.n = {a: len(pids) for a, pids in self.by_author.items()}
        self.window = {a: _ratio_window(n, ratio) for a, n in self.n.items()}
        self.target = {
            a: min(max(math.floor(ratio * n + 0.5), self.window[a][0]), self.window[a][1])
            for a, n in self.n.items()
        }
        self.test: set[str] = set(initial_test or ())

    def _test_count(self, a: int) -> int:
        return sum(1 for pid in self.by_author[a] if pid in self.test)

    def _move_harm(self, pid: str, to_test: bool) -> int:
        harm = 0
        for b in self.gold[pid]:
            lo, hi = self.window[b]
            te = self._test_count(b)
            if to_test and te + 1 > hi:
                harm += 1
            if not to_test and te - 1 < lo:
                harm += 1
        return harm

    def _best_candidate(self, candidates: list[str], to_test: bool) -> str | None:
        if not candidates:
            return None
        scored = [(self._move_harm(pid, to_test), pid) for pid in candidates]
        best = min(s for s, _ in scored)
        pool = [pid for s, pid in scored if s == best]
        return self.rng.choice(pool)

    def assign(self, max_rounds: int = 50) -> None:
        # Phase 1: walk authors toward their targets with harmless moves.
        authors = sorted(self.by_author)
        self.rng.shuffle(authors)
        for a in authors:
            while self._test_count(a) < self.target[a]:
                candidates = [
                    pid
                    for pid in self.by_author[a]
                    if pid not in self.test and pid not in self.pinned
                ]
                candidates = [p for p in candidates if self._move_harm(p, True) == 0]
                if not candidates:
                    break
                self.test.add(self.rng.choice(candidates))
        # Phase 2: repair any author outside the floor/ceil window.
        for _ in range(max_rounds * max(1, len(self.paper_ids))):
            violating = []
            for a in sorted(self.by_author):
                lo, hi = self.window[a]
                te = self._test_count(a)
                if te < lo or te > hi:
                    violating.append((a, te, lo, hi))
            if not violating:
                return
            a, te, lo, hi = self.rng.choice(violating)
            if te < lo:
                pool = [
                    pid
                    for pid in self.by_author[a]
                    if pid not in self.test and pid not in self.pinned
                ]
                pick = self._best_candidate(pool, to_test=True)
                if pick is None:
                    return
                self.test.add(pick)
            else:
                pool = [pid for pid in self.by_author[a] if pid in self.test]
                pick = self._best_candidate(pool, to_test=False)
                if pick is None:
                    return
                self.test.discard(pick)

    def drift(self) -> dict[int, tuple[int, int, int]]:
        out = {}
        for a in sorted(self.by_author):
            lo, hi = self.window[a]
            te = self._test_count(a)
            if te < lo or te > hi:
                out[a] = (te, lo, hi)
        return out


def split_dataset(
    papers: list[tuple[ParsedPaper, set[int]]],
    labels: list[AuthorLabel],
    ratio: float = 0.2,
    seed: int = 0,
    name: str = "D0",
    chunked: bool = False,
) -> DatasetBundle:
    """Stratified per-author train/test split.

    Every paper lands on exactly one side. Train papers with several labels
    are assigned to one of them via a stable per-paper hash; test papers
    keep their full label set. Authors with a single surviving paper go
    entirely to train (with a warning).
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    by_id = {p.id: (p, frozenset(ls)) for p, ls in papers}
    if len(by_id) != len(papers):
        raise ValueError("duplicate paper ids in split input")
    for p, ls in papers:
        if not ls:
            raise ValueError(f"paper {p.id!r} carries no labels")
        if any(l < 0 or l >= len(labels) for l in ls):
            raise ValueError(f"paper {p.id!r} has a label outside the label space")

    gold = {pid: ls for pid, (_, ls) in by_id.items()}
    counts: dict[int, int] = {}
    for ls in gold.values():
        for a in ls:
            counts[a] = counts.get(a, 0) + 1

    warnings = []
    pinned: set[str] = set()
    for a, n in sorted(counts.items()):
        if n < 2:
            warnings.append(
                f"author {labels[a].canonical_name!r} has {n} paper(s); placed in train"
            )
            for pid in sorted(gold):
                if a in gold[pid]:
                    pinned.add(pid)

    rng = random.Random(seed)
    assigner = _SideAssigner(gold, ratio, rng, pinned)
    assigner.assign()
    drift = {
        labels[a].canonical_name: v for a, v in assigner.drift().items()
    }

    train, test = [], []
    for pid in sorted(by_id):
        paper, ls = by_id[pid]
        ordered = tuple(sorted(ls))
        if pid in assigner.test:
            test.append(TestSample(paper, ordered))
        else:
            label = _hash_pick(pid, seed, list(ordered))
            train.append(TrainSample(paper, label, ordered))

    final_labels = [
        replace(lab, paper_count=counts.get(i, 0)) for i, lab in enumerate(labels)
    ]
    return DatasetBundle(
        name=name,
        labels=final_labels,
        train=train,
        test=test,
        chunked=chunked,
        seed=seed,
        ratio_drift=drift,
        warnings=warnings,
    )


def trim_dataset(
    bundle: DatasetBundle, max_papers_per_author: int, seed: int
) -> DatasetBundle:
    """Cap each author's total papers by uniform subsampling, keeping the
    per-author train/test balance. The name gains a T<xx> suffix."""
    if max_papers_per_author < 2:
        raise ValueError("max_papers_per_author must be >= 2")
    cap = max_papers_per_author
    rng = random.Random(seed)

    gold: dict[str, frozenset[int]] = {}
    papers: dict[str, ParsedPaper] = {}
    in_test: set[str] = set()
    for s in bundle.train:
        gold[s.paper.id] = frozenset(s.gold)
        papers[s.paper.id] = s.paper
    for s in bundle.test:
        gold[s.paper.id] = frozenset(s.labels)
        papers[s.paper.id] = s.paper
        in_test.add(s.paper.id)

    by_author: dict[int, list[str]] = {}
    for pid in sorted(gold):
        for a in gold[pid]:
            by_author.setdefault(a, []).append(pid)

    dropped: set[str] = set()
    # Heaviest authors first so collateral removals count toward later caps.
    for a in sorted(by_author, key=lambda a: (-len(by_author[a]), a)):
        remaining = [p for p in by_author[a] if p not in dropped]
        if len(remaining) <= cap:
            continue
        te_keep = round(0.2 * cap)
        tr_keep = cap - te_keep
        tr = [p for p in remaining if p not in in_test]
        te = [p for p in remaining if p in in_test]
        rng.shuffle(tr)
        rng.shuffle(te)
        # If one side is short, keep more of the other; window repair below
        # restores the balance by moving papers across sides.
        te_keep = min(te_keep, len(te))
        tr_keep = min(cap - te_keep, len(tr))
        keep = set(tr[:tr_keep] + te[: cap - tr_keep])
        dropped.update(p for p in remaining if p not in keep)

    kept_gold = {pid: ls for pid, ls in gold.items() if pid not in dropped}
    assigner = _SideAssigner(
        kept_gold,
        ratio=0.2,
        rng=rng,
        pinned_train=set(),
        initial_test={p for p in in_test if p not in dropped},
    )
    assigner.assign()
    drift = {
        bundle.labels[a].canonical_name: v for a, v in assigner.drift().items()
    }

    counts: dict[int, int] = {}
    for ls in kept_gold.values():
        for a in ls:
            counts[a] = counts.get(a, 0) + 1

    train, test = [], []
    for pid in sorted(kept_gold):
        ordered = tuple(sorted(kept_gold[pid]))
        if pid in assigner.test:
            test.append(TestSample(papers[pid], ordered))
        else:
            label = _hash_pick(pid, bundle.seed, list(ordered))
            train.append(TrainSample(papers[pid], label, ordered))

    labels = [
        replace(lab, paper_count=counts.get(i, 0))
        for i, lab in enumerate(bundle.labels)
    ]
    return DatasetBundle(
        name=trimmed_name(bundle.name, cap),
        labels=labels,
        train=train,
        test=test,
        chunked=bundle.chunked,
        seed=bundle.seed,
        ratio_drift=drift,
        warnings=list(bundle.warnings),
    )


def trimmed_name(name: str, cap: int) -> str:
    """D200-C capped at 25 becomes D200T25-C."""
    m = re.match(r"^(?P<base>.*?)(?P<t>T\d+)?(?P<c>-C)?$", name)
    return f"{m.group('base')}T{cap}{m.group('c') or ''}"


def check_bundle(bundle: DatasetBundle, ratio: float = 0.2) -> list[str]:
    """Return violations of the three bundle invariants (empty = healthy)."""
    problems = []
    train_ids = {s.paper.id for s in bundle.train}
    test_ids = {s.paper.id for s in bundle.test}
    overlap = train_ids & test_ids
    if overlap:
        problems.append(f"papers in both splits: {sorted(overlap)}")
    for s in bundle.train:
        if s.label not in s.gold:
            problems.append(f"train paper {s.paper.id} label outside its gold set")
    for s in bundle.test:
        if len(s.labels) < 1:
            problems.append(f"test paper {s.paper.id} has no labels")
    counts: dict[int, tuple[int, int]] = {}
    for s in bundle.train:
        for a in s.gold:
            tr, te = counts.get(a, (0, 0))
            counts[a] = (tr + 1, te)
    for s in bundle.test:
        for a in s.labels:
            tr, te = counts.get(a, (0, 0))
            counts[a] = (tr, te + 1)
    for a, (tr, te) in sorted(counts.items()):
        lo, hi = _ratio_window(tr + te, ratio)
        if not lo <= te <= hi:
            name = bundle.labels[a].canonical_name
            problems.append(f"author {name!r}: {te} test of {tr + te} outside [{lo},{hi}]")
    return problems


def save_bundle(
    bundle: DatasetBundle, directory: str | Path, extras: dict | None = None
) -> Path:
    """Write a dataset directory: manifest + train/test records + papers."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    papers_dir = directory / "papers"
    seen = set()
    for sample in list(bundle.train) + list(bundle.test):
        if sample.paper.id not in seen:
            save_paper(sample.paper, papers_dir)
            seen.add(sample.paper.id)

    with (directory / "train.jsonl").open("w", encoding="utf-8") as fh:
        for s in bundle.train:
            fh.write(
                json.dumps(
                    {"paper_id": s.paper.id, "label": s.label, "gold": list(s.gold)},
                    sort_keys=True,
                )
                + "\n"
            )
    with (directory / "test.jsonl").open("w", encoding="utf-8") as fh:
        for s in bundle.test:
            fh.write(
                json.dumps(
                    {"paper_id": s.paper.id, "labels": list(s.labels)}, sort_keys=True
                )
                + "\n"
            )

    manifest = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "name": bundle.name,
        "seed": bundle.seed,
        "chunked": bundle.chunked,
        "labels": [
            {
                "canonical_name": l.canonical_name,
                "cluster_index": l.cluster_index,
                "paper_count": l.paper_count,
            }
            for l in bundle.labels
        ],
        "counts": {"train": len(bundle.train), "test": len(bundle.test)},
        "ratio_drift": {k: list(v) for k, v in sorted(bundle.ratio_drift.items())},
        "warnings": list(bundle.warnings),
    }
    if extras:
        manifest.update(extras)
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return directory


def load_bundle(directory: str | Path) -> DatasetBundle:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    labels = [
        AuthorLabel(l["canonical_name"], l["cluster_index"], l["paper_count"])
        for l in manifest["labels"]
    ]
    papers_dir = directory / "papers"
    cache: dict[str, ParsedPaper] = {}

    def paper(pid: str) -> ParsedPaper:
        if pid not in cache:
            cache[pid] = load_paper(papers_dir / f"{pid}.txt")
        return cache[pid]

    train, test = [], []
    with (directory / "train.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            train.append(
                TrainSample(paper(rec["paper_id"]), rec["label"], tuple(rec["gold"]))
            )
    with (directory / "test.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            test.append(TestSample(paper(rec["paper_id"]), tuple(rec["labels"])))
    return DatasetBundle(
        name=manifest["name"],
        labels=labels,
        train=train,
        test=test,
        chunked=manifest["chunked"],
        seed=manifest["seed"],
        ratio_drift={k: tuple(v) for k, v in manifest.get("ratio_drift", {}).items()},
        warnings=list(manifest.get("warnings", [])),
    )
