import itertools

import numpy as np
import pytest

from authattr.corpus import ParsedPaper
from authattr.errors import ConfigError
from authattr.evaluate import (
    PaperPrediction,
    estimate_author_count,
    metric1,
    metric2,
    metric3,
    metric4,
    predict_paper,
    rank_labels,
    render_report,
    report,
    write_report,
)
from authattr.features import NativeEncoder
from authattr.ingest import DatasetBundle
from authattr.ingest import TestSample as HeldOutSample
from authattr.model import TrainConfig, forward, softmax, train
from authattr.preprocess import ContentChunk
from authattr.refparse import CitedReference

from test_model import separable_bundle, tiny_model


def pred_from_probs(probs):
    probs = np.asarray(probs, dtype=float)
    return PaperPrediction("p", np.log(probs + 1e-300), probs, rank_labels(probs))


class TestPredictPaper:
    def test_single_chunk_equals_forward(self):
        model = tiny_model(mode="ref_cont", n_hist=3, d_text=5)
        enc = NativeEncoder(dim=5)
        p = ParsedPaper(
            "x",
            (ContentChunk(("some", "words", "here"), 0),),
            (CitedReference("", ("s0",)),),
        )
        pred = predict_paper(model, p, encoder=enc)
        from authattr.features import histogram

        h = histogram(p, model.vocab)
        e = enc.encode(p.chunks[0]).vector
        assert np.allclose(pred.logits, forward(model, e, h))
        assert np.allclose(pred.probabilities, softmax(pred.logits))

    def test_opposite_chunk_logits_give_uniform(self):
        # two chunks with logits L and -L average to zero -> uniform softmax
        model = tiny_model(mode="ref_cont")
        logits = np.array([1.3, -0.4, 2.2])
        mean = (logits + -logits) / 2
        assert np.allclose(softmax(mean), np.full(3, 1 / 3))

    def test_three_chunk_mean_matches_manual(self):
        model = tiny_model(mode="ref_cont", n_hist=3, d_text=5)
        enc = NativeEncoder(dim=5)
        chunks = tuple(
            ContentChunk((w1, w2, w3), i)
            for i, (w1, w2, w3) in enumerate(
                [("aa", "bb", "cc"), ("dd", "ee", "ff"), ("gg", "hh", "ii")]
            )
        )
        p = ParsedPaper("x", chunks, (CitedReference("", ("s1",)),))
        pred = predict_paper(model, p, encoder=enc)
        from authattr.features import histogram

        h = histogram(p, model.vocab)
        per_chunk = [forward(model, enc.encode(c).vector, h) for c in chunks]
        assert np.allclose(pred.logits, np.mean(per_chunk, axis=0))

    def test_first_chunk_only_flag(self):
        model = tiny_model(mode="ref_cont", n_hist=3, d_text=5)
        enc = NativeEncoder(dim=5)
        chunks = (
            ContentChunk(("first", "chunk"), 0),
            ContentChunk(("second", "chunk"), 1),
        )
        p = ParsedPaper("x", chunks, ())
        first = predict_paper(model, p, encoder=enc, first_chunk_only=True)
        single = predict_paper(model, ParsedPaper("x", chunks[:1], ()), encoder=enc)
        assert np.allclose(first.logits, single.logits)

    def test_no_chunks_raises(self):
        model = tiny_model()
        with pytest.raises(ConfigError):
            predict_paper(model, ParsedPaper("x", (), ()), encoder=NativeEncoder(dim=5))

    def test_ranking_ties_broken_by_index(self):
        assert rank_labels(np.array([0.25, 0.25, 0.5])) == (2, 0, 1)
        assert rank_labels(np.array([0.25, 0.25, 0.25, 0.25])) == (0, 1, 2, 3)


class TestMetricExamples:
    def test_metric1(self):
        p = pred_from_probs([0.5, 0.3, 0.2])
        assert metric1(p, {0}) and metric1(p, {0, 2})
        assert not metric1(p, {1})

    def test_metric2(self):
        p = pred_from_probs([0.5, 0.3, 0.2])
        assert metric2(p, {0, 1})
        assert not metric2(p, {0, 2})
        assert metric2(p, {0})

    def test_estimate_author_count_examples(self):
        assert estimate_author_count(pred_from_probs([0.25, 0.25, 0.25, 0.25])) == 4
        assert estimate_author_count(pred_from_probs([0.89, 0.09, 0.02])) == 2
        assert estimate_author_count(pred_from_probs([0.97, 0.02, 0.01])) == 1

    def test_threshold_tie_included(self):
        # 0.05 is exactly 0.1 * 0.5: 'at least' keeps it
        assert estimate_author_count(pred_from_probs([0.5, 0.45, 0.05])) == 3

    def test_metric3_consistency_with_metric2(self):
        p = pred_from_probs([0.5, 0.4, 0.1])
        assert estimate_author_count(p) == 3
        assert metric3(p, {0, 1, 2})
        assert not metric3(p, {0})

    def test_metric3_overshoot_single_author(self):
        p = pred_from_probs([0.6, 0.4])
        assert estimate_author_count(p) == 2
        assert not metric3(p, {0})

    def test_metric4(self):
        probs = [0.3, 0.2, 0.15, 0.12, 0.1, 0.08, 0.05]
        p = pred_from_probs(probs)
        assert metric4(p, {0}, k=5)
        assert metric4(p, {0, 4}, k=5)
        assert not metric4(p, {5}, k=5)
        assert not metric4(p, {0, 1, 2, 3, 4, 5}, k=5)  # pigeonhole

    def test_metric4_k_equals_label_space(self):
        p = pred_from_probs([0.4, 0.3, 0.2, 0.1])
        for r in range(1, 5):
            for gold in itertools.combinations(range(4), r):
                assert metric4(p, set(gold), k=4)

    def test_shift_invariance_of_estimate(self):
        rng = np.random.default_rng(0)
        logits = rng.normal(0, 2, 6)
        for c in (-5.0, 0.0, 11.0):
            p1 = pred_from_probs(softmax(logits))
            p2 = pred_from_probs(softmax(logits + c))
            assert estimate_author_count(p1) == estimate_author_count(p2)


class TestMetricOracles:
    """Exhaustive comparison against set-arithmetic re-implementations."""

    @staticmethod
    def oracle(probs, gold, ratio=0.1, k=5):
        order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
        n = len(gold)
        n_hat = sum(1 for p in probs if p >= ratio * max(probs))
        return {
            "m1": order[0] in gold,
            "m2": set(order[:n]) == gold,
            "m3": set(order[:n_hat]) == gold,
            "m4": gold <= set(order[:k]),
            "n_hat": n_hat,
        }

    def test_enumeration_on_five_labels(self):
        rng = np.random.default_rng(42)
        golds = [
            set(c)
            for r in range(1, 6)
            for c in itertools.combinations(range(5), r)
        ]
        for _ in range(300):
            probs = rng.dirichlet(np.ones(5))
            pred = pred_from_probs(probs)
            for gold in golds:
                want = self.oracle(list(probs), gold)
                assert metric1(pred, gold) == want["m1"]
                assert metric2(pred, gold) == want["m2"]
                assert metric3(pred, gold) == want["m3"]
                assert metric4(pred, gold, k=5) == want["m4"]
                assert estimate_author_count(pred) == want["n_hat"]
                if metric2(pred, gold):
                    assert metric1(pred, gold)

    def test_uniform_predictor_monte_carlo(self):
        # with uniform probabilities and random gold sets, metric1 hits with
        # probability E[|gold|] / n
        rng = np.random.default_rng(7)
        n, trials = 8, 4000
        pred = pred_from_probs(np.full(n, 1 / n))
        sizes, hits = [], 0
        for _ in range(trials):
            size = int(rng.integers(1, 4))
            gold = set(rng.choice(n, size=size, replace=False).tolist())
            sizes.append(size)
            hits += metric1(pred, gold)
        expected = np.mean(sizes) / n
        se = (expected * (1 - expected) / trials) ** 0.5
        assert abs(hits / trials - expected) < 5 * se


class TestReport:
    def _trained(self):
        bundle = separable_bundle(30)
        model = train(
            bundle,
            TrainConfig(learning_rate=1e-2, epochs=10, mode="ref_cont", seed=0),
            encoder=NativeEncoder(dim=32),
            hidden=16,
        )
        return model, bundle

    def test_perfect_predictor_scores_one(self):
        model, bundle = self._trained()
        rep = report(model, bundle, encoder=NativeEncoder(dim=32))
        assert rep.m1 == 1.0 and rep.m2 == 1.0 and rep.m4 == 1.0
        assert rep.counts["overall"] == len(bundle.test)

    def test_overall_is_sample_weighted_combination(self):
        model, bundle = self._trained()
        mixed = DatasetBundle(
            bundle.name,
            bundle.labels,
            bundle.train,
            [
                HeldOutSample(s.paper, s.labels if i % 3 else (0, 1))
                for i, s in enumerate(bundle.test)
            ],
            chunked=False,
            seed=0,
        )
        rep = report(model, mixed, encoder=NativeEncoder(dim=32))
        for m in ("m1", "m2", "m3", "m4"):
            n_s, n_m = rep.counts["single"], rep.counts["multi"]
            combined = (
                rep.strata["single"][m] * n_s + rep.strata["multi"][m] * n_m
            ) / (n_s + n_m)
            assert rep.strata["overall"][m] == pytest.approx(combined)

    def test_order_insensitive_and_deterministic(self):
        model, bundle = self._trained()
        rep1 = report(model, bundle, encoder=NativeEncoder(dim=32))
        reordered = DatasetBundle(
            bundle.name,
            bundle.labels,
            bundle.train,
            list(reversed(bundle.test)),
            chunked=False,
            seed=0,
        )
        rep2 = report(model, reordered, encoder=NativeEncoder(dim=32))
        for stratum in ("single", "multi", "overall"):
            for m in ("m1", "m2", "m3", "m4"):
                a, b = rep1.strata[stratum][m], rep2.strata[stratum][m]
                assert a == b or (np.isnan(a) and np.isnan(b))
        assert rep1.per_author_accuracy == rep2.per_author_accuracy

    def test_report_files(self, tmp_path):
        model, bundle = self._trained()
        rep = report(model, bundle, encoder=NativeEncoder(dim=32))
        out = write_report(rep, tmp_path / "rep", title="TOY / ref_cont")
        assert (out / "report.txt").exists()
        assert (out / "report.json").exists()
        assert (out / "per_author_accuracy.csv").exists()
        assert (out / "accuracy_histogram.csv").exists()
        assert (out / "accuracy_by_papers.csv").exists()
        import json

        payload = json.loads((out / "report.json").read_text())
        assert set(payload["strata"]) == {"single", "multi", "overall"}
        for row in payload["strata"].values():
            assert set(row) == {"m1", "m2", "m3", "m4"}
        text = render_report(rep, "TOY / ref_cont")
        assert "Metric 1" in text and "overall" in text

    def test_empty_test_split_raises(self):
        model, bundle = self._trained()
        empty = DatasetBundle(
            bundle.name, bundle.labels, bundle.train, [], chunked=False, seed=0
        )
        with pytest.raises(ConfigError):
            report(model, empty, encoder=NativeEncoder(dim=32))
