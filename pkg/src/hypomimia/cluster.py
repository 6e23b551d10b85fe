"""Two-dimensional PCA projection and k-means partition of the feature table."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidValueError
from .numcore import RandomStream, symmetric_eigen

N_COMPONENTS = 2
N_CLUSTERS = 3
RESTARTS = 10
MAX_ITER = 300
TIE_SLACK = 1e-12


@dataclass
class PcaProjection:
    mean: np.ndarray
    components: np.ndarray  # shape (n_components, d), orthonormal rows
    explained_variance: np.ndarray
    scale: np.ndarray | None = None

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        Z = X - self.mean
        if self.scale is not None:
            Z = Z / self.scale
        return Z @ self.components.T


def pca_fit(X, n_components=N_COMPONENTS, standardize=False):
    """Principal axes of the sample covariance (divisor n - 1).

    Each component is sign-flipped so its largest-magnitude entry is
    positive. With ``standardize`` the columns are scaled to unit sample SD
    before the decomposition.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 3:
        raise InsufficientDataError(f"PCA needs at least 3 rows, got shape {X.shape}")
    if n_components > X.shape[1]:
        raise InvalidValueError(f"{n_components} components requested from {X.shape[1]} features")
    mean = X.mean(axis=0)
    Z = X - mean
    scale = None
    if standardize:
        sd = Z.std(axis=0, ddof=1)
        scale = np.where(sd > 0, sd, 1.0)
        Z = Z / scale
    cov = Z.T @ Z / (X.shape[0] - 1)
    cov = (cov + cov.T) / 2
    w, V = symmetric_eigen(cov)
    comps = V[:, :n_components].T.copy()
    for c in comps:
        if c[np.argmax(np.abs(c))] < 0:
            c *= -1
    return PcaProjection(mean, comps, np.maximum(w[:n_components], 0.0), scale)


def _sq_dists(P, centers):
    return np.sum((P[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def kmeans_pp_init(P, k, gen):
    n = P.shape[0]
    centers = [P[gen.integers(n)]]
    d2 = np.sum((P - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), gen.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(gen.integers(n))
        centers.append(P[idx])
        d2 = np.minimum(d2, np.sum((P - P[idx]) ** 2, axis=1))
    return np.array(centers)


@dataclass
class KmeansPartition:
    centers: np.ndarray
    assignments: np.ndarray
    inertia: float
    n_iter: int = 0
    restart: int = 0
    history: list = field(default_factory=list)


def lloyd(P, centers, max_iter=MAX_ITER):
    """Lloyd iterations from the given centres.

    The inertia after every iteration is recorded in ``history``; an
    increase beyond rounding raises, since it would indicate a bug.
    """
    centers = centers.copy()
    k = centers.shape[0]
    assign = np.argmin(_sq_dists(P, centers), axis=1)
    history = [float(np.sum((P - centers[assign]) ** 2))]
    it = 0
    for it in range(1, max_iter + 1):
        for c in range(k):
            members = assign == c
            if members.any():
                centers[c] = P[members].mean(axis=0)
            else:
                # reseed an empty cluster at the point farthest from its centre
                far = int(np.argmax(np.sum((P - centers[assign]) ** 2, axis=1)))
                centers[c] = P[far]
                assign[far] = c
        new = np.argmin(_sq_dists(P, centers), axis=1)
        inertia = float(np.sum((P - centers[new]) ** 2))
        if inertia > history[-1] * (1 + 1e-12) + 1e-12:
            raise AssertionError(f"k-means inertia rose from {history[-1]} to {inertia}")
        history.append(inertia)
        if np.array_equal(new, assign):
            break
        assign = new
    return KmeansPartition(centers, assign, history[-1], it, 0, history)


def kmeans(points, k=N_CLUSTERS, restarts=RESTARTS, max_iter=MAX_ITER, stream=RandomStream(0),
           threads=1):
    """Best-of-``restarts`` k-means with k-means++ seeding.

    Restart ``r`` draws from ``stream.substream(("restart", r))``; the
    winner is the lowest ``(inertia, r)``.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] < k or k < 1:
        raise InsufficientDataError(f"k-means with k={k} needs at least {k} points")

    def run(r):
        gen = stream.substream(("restart", r)).generator()
        part = lloyd(P, kmeans_pp_init(P, k, gen), max_iter)
        part.restart = r
        return part

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(restarts)))
    else:
        parts = [run(r) for r in range(restarts)]
    return min(parts, key=lambda p: (p.inertia, p.restart))


@dataclass
class ClusterSummary:
    cluster: int
    size: int
    pd_count: int
    pd_fraction: float | None
    center: list
    center_distance: float


def figure2_report(partition, pd_labels):
    """Per-cluster size and PD share, ordered by descending PD fraction."""
    labels = np.asarray(pd_labels, dtype=bool)
    if labels.size != partition.assignments.size:
        raise InvalidValueError("labels and assignments differ in length")
    rows = []
    for c, center in enumerate(partition.centers):
        members = partition.assignments == c
        size = int(members.sum())
        pd = int(labels[members].sum())
        rows.append(ClusterSummary(c, size, pd, pd / size if size else None,
                                   [float(v) for v in center], float(np.linalg.norm(center))))
    rows.sort(key=lambda r: (-(r.pd_fraction if r.pd_fraction is not None else -1.0), r.cluster))
    return rows
