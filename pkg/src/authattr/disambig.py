"""Author-name ambiguity detection via density clustering of abstracts.

One author name mapping to several physical people shows up as several
dense clusters of abstract embeddings; a single person produces one cluster
plus noise. Ambiguous names are discarded from the label space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import AuthorLabel

# Defaults calibrated on the synthetic 40-author set (see tune_params and
# authattr.synth.calibration_authors). Embeddings are L2-normalized, so
# Euclidean distances live in [0, 2].
DEFAULT_EPS = 0.6
DEFAULT_MIN_PTS = 3


@dataclass(frozen=True)
class AbstractEmbedding:
    paper_id: str
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        if v.ndim != 1:
            raise ValueError("embedding vector must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding vector contains non-finite entries")
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True)
class ClusterVerdict:
    n_clusters: int
    n_noise: int
    unique_person: bool


def _pairwise_distances(x: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        sq = np.sum(x * x, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        return np.sqrt(np.maximum(d2, 0.0))
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        norms = np.where(norms == 0.0, 1.0, norms)
        sim = (x / norms[:, None]) @ (x / norms[:, None]).T
        return 1.0 - np.clip(sim, -1.0, 1.0)
    raise ValueError(f"unknown metric {metric!r}")


def dbscan(
    points: list[AbstractEmbedding],
    eps: float,
    min_pts: int,
    metric: str = "euclidean",
) -> tuple[list[int], int, int]:
    """Density-based clustering with standard DBSCAN semantics.

    A core point has >= min_pts neighbors (itself included) within eps;
    clusters are the connected components over core points; border points
    attach to the cluster of their nearest core point; everything else is
    noise (-1). Labels are canonicalized by first occurrence, so the
    partition does not depend on input order.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    if not points:
        raise ValueError("dbscan needs at least one point")
    dims = {p.vector.shape[0] for p in points}
    if len(dims) != 1:
        raise ValueError("all embedding vectors must share one dimension")

    x = np.stack([p.vector for p in points])
    n = len(points)
    dist = _pairwise_distances(x, metric)
    within = dist <= eps
    core = within.sum(axis=1) >= min_pts

    labels = [-1] * n
    cluster = 0
    for i in range(n):
        if not core[i] or labels[i] != -1:
            continue
        # Flood-fill the density-connected component of core point i.
        labels[i] = cluster
        frontier = [i]
        while frontier:
            j = frontier.pop()
            for k in np.nonzero(within[j])[0]:
                if core[k] and labels[k] == -1:
                    labels[k] = cluster
                    frontier.append(int(k))
        cluster += 1

    # Border points: nearest core point within eps decides the cluster.
    # Distance ties are broken by the core point's coordinates so the
    # assignment is independent of input order.
    for i in range(n):
        if core[i] or labels[i] != -1:
            continue
        best = None
        for k in np.nonzero(within[i])[0]:
            if not core[k]:
                continue
            key = (dist[i, k], tuple(x[k]))
            if best is None or key < best[0]:
                best = (key, labels[k])
        if best is not None:
            labels[i] = best[1]

    # Canonicalize: cluster ids in order of first appearance.
    remap: dict[int, int] = {}
    canon = []
    for l in labels:
        if l == -1:
            canon.append(-1)
            continue
        if l not in remap:
            remap[l] = len(remap)
        canon.append(remap[l])
    n_clusters = len(remap)
    n_noise = canon.count(-1)
    return canon, n_clusters, n_noise


def verdict(
    author: AuthorLabel,
    abstracts: list[AbstractEmbedding],
    eps: float = DEFAULT_EPS,
    min_pts: int = DEFAULT_MIN_PTS,
    metric: str = "euclidean",
) -> ClusterVerdict:
    """Decide whether one author name is one physical person.

    Fewer than min_pts abstracts cannot support a split, so the author is
    kept (n_clusters=0, unique).
    """
    if len(abstracts) < min_pts:
        return ClusterVerdict(n_clusters=0, n_noise=len(abstracts), unique_person=True)
    _, n_clusters, n_noise = dbscan(abstracts, eps, min_pts, metric)
    return ClusterVerdict(n_clusters, n_noise, unique_person=n_clusters <= 1)


def tune_params(
    authors: list[tuple[bool, list[AbstractEmbedding]]],
    eps_grid: list[float],
    min_pts_grid: list[int],
    metric: str = "euclidean",
) -> tuple[float, int, float]:
    """Grid-search (eps, min_pts) on a labeled calibration set.

    ``authors`` pairs a ground-truth unique-person flag with that author's
    abstract embeddings. Returns the best (eps, min_pts, accuracy); ties
    prefer smaller min_pts, then smaller eps.
    """
    if not authors:
        raise ValueError("calibration set is empty")
    best: tuple[float, int, float] | None = None
    for min_pts in sorted(min_pts_grid):
        for eps in sorted(eps_grid):
            hits = 0
            for is_unique, embs in authors:
                v = verdict(AuthorLabel("calibration"), embs, eps, min_pts, metric)
                hits += v.unique_person == is_unique
            acc = hits / len(authors)
            if best is None or acc > best[2]:
                best = (eps, min_pts, acc)
    return best
