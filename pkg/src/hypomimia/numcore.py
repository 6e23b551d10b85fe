"""Deterministic numerical primitives shared by the pipeline."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidValueError

_MASK64 = (1 << 64) - 1


def sample_variance(values) -> float:
    """Unbiased sample variance (divisor ``n - 1``) by the two-pass formula."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientDataError(f"variance needs at least 2 values, got {x.size}")
    d = x - x.mean()
    return float(np.dot(d, d) / (x.size - 1))


def midranks(values) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of the ranks they span."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise InsufficientDataError("midranks of an empty sequence")
    if np.isnan(x).any():
        raise InvalidValueError("midranks: NaN in input")
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], xs.size]
    run_rank = (starts + 1 + ends) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(run_rank, ends - starts)
    return ranks


@dataclass(frozen=True)
class RandomStream:
    """A reproducible random source identified by ``(seed, stream_id)``.

    The stream is value-like: :meth:`generator` always returns a fresh
    generator positioned at the start of the sequence, and
    :meth:`substream` derives a new independent stream from a label without
    touching any state.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise InvalidValueError("seed and stream_id must be 64-bit unsigned integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, label) -> RandomStream:
        h = hashlib.blake2b(digest_size=8)
        h.update(self.stream_id.to_bytes(8, "little"))
        h.update(repr(label).encode())
        return RandomStream(self.seed, int.from_bytes(h.digest(), "little"))


def _check_symmetric(m):
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidValueError("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise InvalidValueError("matrix is not symmetric")
    return a


def symmetric_eigen(m, tol=1e-11, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Exactly symmetric, finite matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * ||m||_F``.
    max_sweeps : int

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Sorted in descending order.
    eigenvectors : ndarray, shape (n, n)
        Orthonormal columns; column ``i`` pairs with ``eigenvalues[i]``.
    """
    a = _check_symmetric(m)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # theta would overflow; tan(phi) ~ apq / diff
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.hypot(theta, 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]
