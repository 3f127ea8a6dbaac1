"""Train the fusion classifier in its four modes and compare them.

Reproduces the qualitative picture on a small synthetic corpus: references
help, self-citations carry much of that signal, and averaging chunk logits
beats scoring only the first chunk.
"""

import tempfile

from authattr.corpus import load_corpus
from authattr.evaluate import estimate_author_count, predict_paper, render_report, report
from authattr.features import EmbeddingCache, NativeEncoder
from authattr.model import TrainConfig, train
from authattr.pipeline import build_dataset
from authattr.synth import make_corpus

with tempfile.TemporaryDirectory() as td:
    corpus = load_corpus(make_corpus(td, n_authors=7, papers_per_author=40, seed=11))
    encoder = NativeEncoder()
    bundle, _ = build_dataset(corpus, min_papers=20, encoder=encoder, seed=3, chunked=True)
    print(f"dataset {bundle.name}: {len(bundle.train)} train / {len(bundle.test)} test")

    cache = EmbeddingCache()
    results = {}
    for mode, lr in [
        ("content", 1e-4),
        ("references", 8e-4),
        ("ref_no_self", 8e-4),
        ("ref_cont", 5e-5),
    ]:
        cfg = TrainConfig(learning_rate=lr, epochs=10, mode=mode, seed=5)
        model = train(bundle, cfg, encoder=encoder, cache=cache, vocab_min_count=20)
        rep = report(model, bundle, encoder=encoder, cache=cache)
        results[mode] = rep.m1
        print(f"  {mode:12s} lr={lr:<7g} top-1 accuracy {rep.m1:.1%}")
        if mode == "ref_cont":
            fusion_model, fusion_report = model, rep

    first = report(fusion_model, bundle, encoder=encoder, cache=cache, first_chunk_only=True)
    print(f"  {'first-chunk':12s} (same fusion model)  {first.m1:.1%}")

    print("\nfull fusion report:")
    print(render_report(fusion_report, f"{bundle.name} / ref_cont"))

    sample = bundle.test[0]
    pred = predict_paper(fusion_model, sample.paper, encoder=encoder, cache=cache)
    print(f"prediction for test paper {sample.paper.id}:")
    print(f"  true author(s): {[bundle.labels[a].canonical_name for a in sample.labels]}")
    print(f"  estimated author count: {estimate_author_count(pred)}")
    for rank, idx in enumerate(pred.ranked[:3], start=1):
        name = bundle.labels[idx].canonical_name
        print(f"  {rank}. {name:20s} p={pred.probabilities[idx]:.3f}")
