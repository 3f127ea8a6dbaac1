"""Build a labeled dataset from a synthetic corpus and inspect it.

Covers author thresholding, ambiguity verdicts, the stratified 80/20 split
and the trimmed variant with its naming convention.
"""

import tempfile
from collections import Counter
from pathlib import Path

from authattr.corpus import load_corpus
from authattr.features import NativeEncoder
from authattr.ingest import check_bundle, save_bundle, trim_dataset
from authattr.pipeline import build_dataset
from authattr.synth import make_corpus

with tempfile.TemporaryDirectory() as td:
    corpus_path = make_corpus(td, n_authors=5, papers_per_author=24, seed=3)
    corpus = load_corpus(corpus_path)
    print(f"corpus: {len(corpus)} manuscripts")

    bundle, extras = build_dataset(
        corpus, min_papers=10, encoder=NativeEncoder(), seed=1, chunked=True
    )
    print(f"\ndataset {bundle.name}: {len(bundle.labels)} authors")
    print(f"train {len(bundle.train)} / test {len(bundle.test)} papers")
    print("ambiguity verdicts:")
    for name, v in extras["disambig"].items():
        state = "kept" if v["kept"] else "discarded"
        print(f"  {name:16s} {state} ({v['n_clusters']} clusters, {v['n_noise']} noise)")

    per_author = Counter()
    for s in bundle.train:
        for a in s.gold:
            per_author[(a, "train")] += 1
    for s in bundle.test:
        for a in s.labels:
            per_author[(a, "test")] += 1
    print("\nper-author 80/20 balance:")
    for i, label in enumerate(bundle.labels):
        tr, te = per_author[(i, "train")], per_author[(i, "test")]
        print(f"  {label.canonical_name:16s} {tr:3d} train / {te:2d} test")
    print("invariant violations:", check_bundle(bundle) or "none")

    trimmed = trim_dataset(bundle, max_papers_per_author=15, seed=1)
    print(f"\ntrimmed to 15 papers/author -> {trimmed.name}")
    print(f"train {len(trimmed.train)} / test {len(trimmed.test)} papers")

    out = Path(td) / trimmed.name
    save_bundle(trimmed, out, extras)
    print(f"serialized dataset directory: {sorted(p.name for p in out.iterdir())}")
