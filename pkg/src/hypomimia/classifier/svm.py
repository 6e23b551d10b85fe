"""Soft-margin kernel SVM trained by sequential minimal optimisation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ConvergenceWarning, DegenerateLabelError, ShapeError

TAU = 1e-12


def kernel_matrix(A, B, kernel="rbf", gamma=1.0):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        d2 = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-gamma * np.maximum(d2, 0.0))
    raise ConfigError(f"unknown kernel {kernel!r}")


@dataclass
class SvmModel:
    kernel: str
    gamma: float
    C: float
    support_vectors: np.ndarray
    support_labels: np.ndarray
    alpha: np.ndarray
    bias: float
    objective: float
    kkt_violation: float
    n_iter: int
    converged: bool

    @property
    def dual_coef(self):
        return self.alpha * self.support_labels

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ShapeError(
                f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        f = kernel_matrix(X, self.support_vectors, self.kernel, self.gamma) @ self.dual_coef
        f = f + self.bias
        return f[0] if single else f


def _bias(alpha, y, G, C):
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return -float(np.mean(yG[free]))
    upper = alpha >= C
    # bounds on rho = -b from the at-bound multipliers
    lb_mask = (upper & (y > 0)) | (~upper & (y < 0))
    ub_mask = ~lb_mask
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    if not np.isfinite(lb):
        lb = ub
    if not np.isfinite(ub):
        ub = lb
    return -float((lb + ub) / 2.0)


def solve_dual(K, y, C, tol=1e-3, max_iter=100_000):
    """Minimise ``0.5 a'Qa - sum(a)`` subject to ``y'a = 0`` and ``0 <= a <= C``.

    ``Q = (y y') * K``. Working pairs are chosen by maximal violation with
    second-order selection of the partner. Returns ``(alpha, G, n_iter,
    violation)`` where ``G`` is the final gradient.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)
    diag = np.diag(K).copy()
    violation = np.inf
    it = 0
    while it < max_iter:
        minus_yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            violation = 0.0
            break
        cand = np.where(up, minus_yG, -np.inf)
        i = int(np.argmax(cand))
        m = cand[i]
        M = np.min(np.where(low, minus_yG, np.inf))
        violation = float(m - M)
        if violation < tol:
            break
        b = m - minus_yG
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(score))

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if yi != yj:
            quad = diag[i] + diag[j] + 2.0 * yi * yj * K[i, j]
            quad = quad if quad > 0 else TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * yi * yj * K[i, j]
            quad = quad if quad > 0 else TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        G += y * (K[:, i] * (yi * (ai - ai_old)) + K[:, j] * (yj * (aj - aj_old)))
        it += 1
    return alpha, G, it, violation


def train_svm(X, y, kernel="rbf", C=1.0, gamma=None, tol=1e-3, max_iter=100_000):
    """Fit a soft-margin SVM.

    Parameters
    ----------
    X : array_like, shape (n, d)
    y : array_like of {-1, +1}
    kernel : {"linear", "rbf"}
    C : float
    gamma : float, optional
        RBF width; defaults to ``1 / (d * mean per-feature variance)``.
    tol : float
        Stop once the maximal KKT violation drops below ``tol``.

    Returns
    -------
    SvmModel
        Decision value ``f(x) = sum_i alpha_i y_i K(x_i, x) + b``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ShapeError(f"X has shape {X.shape} but y has {y.size} labels")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ConfigError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise DegenerateLabelError("training data contains a single class")
    if C <= 0:
        raise ConfigError(f"C must be positive, got {C}")
    if gamma is None:
        gamma = default_gamma(X)
    K = kernel_matrix(X, X, kernel, gamma)
    alpha, G, it, violation = solve_dual(K, y, C, tol, max_iter)
    converged = violation < tol
    if not converged:
        warnings.warn(f"SMO stopped after {it} iterations with KKT violation {violation:.3g}",
                      ConvergenceWarning, stacklevel=2)
    b = _bias(alpha, y, G, C)
    # G = Q a - 1, so 0.5 a'Qa - sum(a) = 0.5 a'(G - 1)
    objective = float(0.5 * np.dot(alpha, G - 1.0))
    sv = alpha > 0
    return SvmModel(kernel, float(gamma), float(C), X[sv].copy(), y[sv].copy(), alpha[sv].copy(),
                    b, objective, violation, it, converged)


def default_gamma(X):
    var = np.var(np.asarray(X, dtype=float), axis=0).mean()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def predict(model, x):
    """Return ``(label, decision_value)``; a decision value of exactly 0 maps to +1."""
    f = model.decision_function(x)
    return np.where(f >= 0, 1, -1) if np.ndim(f) else (1 if f >= 0 else -1), f
