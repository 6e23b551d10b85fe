"""Group comparisons: Mann-Whitney U with Bonferroni adjustment."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InsufficientDataError, InvalidValueError
from .numcore import midranks

EXACT_MAX_N = 12
_ALTERNATIVES = ("two-sided", "less", "greater")


def _exact_counts(doubled_ranks, n_a):
    """Number of size-``n_a`` subsets of the pooled ranks for each doubled rank sum."""
    r = np.asarray(doubled_ranks, dtype=np.int64)
    top = int(np.sort(r)[::-1][:n_a].sum())
    dp = np.zeros((n_a + 1, top + 1))
    dp[0, 0] = 1.0
    for v in r:
        # descending k so each rank is used at most once
        for k in range(min(n_a, len(r)), 0, -1):
            dp[k, v:] += dp[k - 1, : top + 1 - v]
    return dp[n_a]


def mann_whitney_u(sample_a, sample_b, mode="auto", alternative="two-sided"):
    """Mann-Whitney U test.

    Parameters
    ----------
    sample_a, sample_b : array_like
    mode : {"auto", "exact", "normal-approx"}
        ``auto`` enumerates the permutation distribution when the pooled size
        is at most 12 and otherwise uses the normal approximation with tie
        and continuity corrections.
    alternative : {"two-sided", "less", "greater"}
        ``less`` tests whether ``a`` tends to be smaller than ``b``.

    Returns
    -------
    u : float
        ``R_a - n_a (n_a + 1) / 2`` with ``R_a`` the midrank sum of ``a``.
    p : float
    """
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError("Mann-Whitney U needs two non-empty samples")
    if alternative not in _ALTERNATIVES:
        raise InvalidValueError(f"unknown alternative {alternative!r}")
    if mode == "auto":
        mode = "exact" if a.size + b.size <= EXACT_MAX_N else "normal-approx"
    na, nb = a.size, b.size
    n = na + nb
    ranks = midranks(np.concatenate([a, b]))
    ra = ranks[:na].sum()
    u = ra - na * (na + 1) / 2.0

    if mode == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = _exact_counts(doubled, na)
        sums = np.arange(counts.size)
        obs = int(doubled[:na].sum())
        centre = na * (n + 1)
        if alternative == "two-sided":
            hit = np.abs(sums - centre) >= abs(obs - centre)
        elif alternative == "less":
            hit = sums <= obs
        else:
            hit = sums >= obs
        p = counts[hit].sum() / counts.sum()
    elif mode == "normal-approx":
        mu = na * nb / 2.0
        _, tie_sizes = np.unique(ranks, return_counts=True)
        ties = float(np.sum(tie_sizes.astype(float) ** 3 - tie_sizes))
        var = na * nb / 12.0 * ((n + 1) - ties / (n * (n - 1))) if n > 1 else 0.0
        if var <= 0:
            return float(u), 1.0
        sd = math.sqrt(var)
        if alternative == "two-sided":
            z = max(abs(u - mu) - 0.5, 0.0) / sd
            p = 2.0 * ndtr(-z)
        elif alternative == "less":
            p = ndtr((u - mu + 0.5) / sd)
        else:
            p = ndtr(-(u - mu - 0.5) / sd)
    else:
        raise InvalidValueError(f"unknown mode {mode!r}")
    return float(u), float(min(1.0, max(0.0, p)))


def bonferroni(ps, m=None):
    """Bonferroni-adjusted p-values ``min(1, m * p)``."""
    p = np.asarray(ps, dtype=float).ravel()
    m = p.size if m is None else int(m)
    if m < p.size or m < 1:
        raise InvalidValueError(f"family size {m} smaller than the number of p-values {p.size}")
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise InvalidValueError("p-values must lie in [0, 1]")
    return np.minimum(1.0, m * p)


@dataclass
class GroupSummary:
    feature: str
    n_pd: int
    n_nonpd: int
    pd_mean: float
    pd_sd: float | None
    nonpd_mean: float
    nonpd_sd: float | None
    u_statistic: float
    raw_p: float
    adjusted_p: float


def _sd(x):
    return float(np.std(x, ddof=1)) if x.size > 1 else None


def table2_analysis(table, mode="auto", m=None):
    """Per-feature PD versus non-PD comparison.

    Each column of ``table.X`` is tested with a two-sided Mann-Whitney U
    test (U reported for the PD group) and adjusted for a family of ``m``
    tests, by default the number of features.
    """
    pd = table.labels
    if pd.sum() == 0 or (~pd).sum() == 0:
        raise InsufficientDataError(
            f"need both groups: {int(pd.sum())} PD, {int((~pd).sum())} non-PD participants")
    raw, rows = [], []
    for j, name in enumerate(table.names):
        a, b = table.X[pd, j], table.X[~pd, j]
        u, p = mann_whitney_u(a, b, mode=mode)
        raw.append(p)
        rows.append([name, a, b, u])
    adj = bonferroni(raw, m if m is not None else len(raw))
    return [
        GroupSummary(name, int(a.size), int(b.size), float(a.mean()), _sd(a), float(b.mean()),
                     _sd(b), u, p, float(q))
        for (name, a, b, u), p, q in zip(rows, raw, adj)
    ]


TABLE2_COLUMNS = ("feature", "n_pd", "n_nonpd", "pd_mean", "pd_sd", "nonpd_mean", "nonpd_sd",
                  "u_statistic", "raw_p", "adjusted_p")


def table2_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE2_COLUMNS)
    for r in rows:
        d = asdict(r)
        w.writerow(["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c])
                    for c in TABLE2_COLUMNS])
    return buf.getvalue()
