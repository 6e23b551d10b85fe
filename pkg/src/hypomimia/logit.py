"""Unpenalised logistic regression by Newton iterations, with Wald tests."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit, ndtr

from .errors import CollinearityError, ConvergenceError, InsufficientDataError, SeparationError

GRAD_TOL = 1e-8
MAX_ITER = 100
MAX_NORM = 1e4
PERFECT_FIT = 1e-6
MAX_COND = 1e13


def design(X):
    X = np.asarray(X, dtype=float)
    X = X.reshape(X.shape[0], -1)
    return np.column_stack([np.ones(X.shape[0]), X])


def log_likelihood(beta, A, y):
    eta = A @ beta
    return float(np.sum(y * log_expit(eta) + (1 - y) * log_expit(-eta)))


def score(beta, A, y):
    """Gradient of the Bernoulli log-likelihood."""
    return A.T @ (y - expit(A @ beta))


def fisher_information(beta, A):
    p = expit(A @ beta)
    return (A * (p * (1 - p))[:, None]).T @ A


@dataclass
class LogitFit:
    names: tuple
    intercept: float
    coefficients: np.ndarray
    intercept_se: float
    standard_errors: np.ndarray
    wald_z: np.ndarray
    p_values: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int
    gradient_norm: float
    standardized: bool = False


def fit_logistic(X, y, names=None, max_iter=MAX_ITER, gtol=GRAD_TOL):
    """Maximum-likelihood logistic regression with an intercept.

    Parameters
    ----------
    X : array_like, shape (n, d)
        Design without the intercept column; ``d`` may be 0.
    y : array_like of {0, 1}

    Returns
    -------
    LogitFit
        Standard errors come from the inverse observed information at the
        returned coefficients.

    Raises
    ------
    CollinearityError
        If the design with intercept is rank deficient.
    SeparationError
        If the coefficients diverge, every label is fitted perfectly, or the
        information matrix is numerically singular.
    """
    A = design(X)
    y = np.asarray(y, dtype=float).ravel()
    n, k = A.shape
    if y.size != n:
        raise InsufficientDataError(f"{n} rows but {y.size} labels")
    n_pos = int(y.sum())
    if min(n_pos, n - n_pos) < 2:
        raise InsufficientDataError("logistic regression needs at least 2 samples per class")
    if np.linalg.matrix_rank(A) < k:
        raise CollinearityError("design matrix (with intercept) is rank deficient")
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k - 1))

    beta = np.zeros(k)
    beta[0] = np.log(n_pos / (n - n_pos))
    ll = log_likelihood(beta, A, y)
    converged = False
    it = 0
    g = score(beta, A, y)
    while it < max_iter:
        if np.max(np.abs(g)) <= gtol:
            converged = True
            break
        H = fisher_information(beta, A)
        step = np.linalg.solve(H, g)
        t = 1.0
        # halve the Newton step until the likelihood does not drop
        while True:
            cand = beta + t * step
            ll_new = log_likelihood(cand, A, y)
            if ll_new >= ll - 1e-12 * abs(ll) or t < 1e-10:
                break
            t /= 2
        beta, ll = cand, ll_new
        it += 1
        g = score(beta, A, y)
        if np.linalg.norm(beta) > MAX_NORM:
            break
    else:
        converged = np.max(np.abs(g)) <= gtol

    H = fisher_information(beta, A)
    perfect = np.max(np.abs(y - expit(A @ beta))) < PERFECT_FIT
    if np.linalg.norm(beta) > MAX_NORM or perfect or np.linalg.cond(H) > MAX_COND:
        slope = beta[1:]
        if not perfect and np.linalg.norm(beta) <= MAX_NORM:
            # flattest direction of the likelihood
            slope = np.linalg.eigh(H)[1][1:, 0]
        norm = np.linalg.norm(slope)
        direction = slope / norm if norm > 0 else slope
        desc = ", ".join(f"{nm}={v:+.3f}" for nm, v in zip(names, direction))
        raise SeparationError(f"classes are (quasi-)separated along direction [{desc}]", direction)

    cov = np.linalg.inv(H)
    se = np.sqrt(np.diag(cov))
    z = beta / se
    pv = 2.0 * ndtr(-np.abs(z))
    return LogitFit(names, float(beta[0]), beta[1:].copy(), float(se[0]), se[1:].copy(), z[1:].copy(),
                    pv[1:].copy(), cov, ll, bool(converged), it, float(np.max(np.abs(g))))


def standardize(X):
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    return (X - mean) / np.where(sd > 0, sd, 1.0)


def regress(table, standardized=True):
    """Fit PD label on the feature table (original rows, no oversampling)."""
    X = standardize(table.X) if standardized else table.X
    fit = fit_logistic(X, table.labels.astype(float), names=table.names)
    fit.standardized = standardized
    return fit


@dataclass
class WeightRow:
    feature: str
    weight: float
    se: float
    z: float
    p: float
    significant: bool


def figure1_report(fit, alpha=0.05):
    """One row per feature with its weight and a ``p < alpha`` flag."""
    if not fit.converged:
        raise ConvergenceError(
            f"logistic fit did not converge after {fit.iterations} iterations "
            f"(gradient max-norm {fit.gradient_norm:.3g})")
    return [WeightRow(nm, float(b), float(s), float(z), float(p), bool(p < alpha))
            for nm, b, s, z, p in zip(fit.names, fit.coefficients, fit.standard_errors,
                                      fit.wald_z, fit.p_values)]


def figure1_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "weight", "se", "z", "p", "significant"])
    for r in rows:
        w.writerow([r.feature, repr(r.weight), repr(r.se), repr(r.z), repr(r.p), int(r.significant)])
    return buf.getvalue()
