"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n PASS|FAIL`` line (visible with
``pytest -s`` or when the module is run directly) and then asserts.
"""

import filecmp
import itertools
import json
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import kstest

from hypomimia.classifier import SmoteConfig, balance, predict, smote, train_svm
from hypomimia.classifier.svm import kernel_matrix
from hypomimia.cli import main
from hypomimia.cluster import kmeans, kmeans_pp_init, lloyd
from hypomimia.features import FEATURE_NAMES, active_au_variance
from hypomimia.ingest import FrameTable
from hypomimia.logit import design, fit_logistic, log_likelihood, regress, score
from hypomimia.numcore import RandomStream, midranks, sample_variance, symmetric_eigen
from hypomimia.stats import mann_whitney_u
from hypomimia.synth import CohortSpec, generate_features


def report(n, ok, detail):
    print(f"CRITERION {n:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


# 1. Mann-Whitney exact p against brute-force enumeration

def brute_force_p(a, b):
    pooled = np.concatenate([a, b])
    r = midranks(pooled)
    n, na = pooled.size, len(a)
    mean = na * (n + 1) / 2
    obs = abs(r[:na].sum() - mean)
    hits = total = 0
    for idx in itertools.combinations(range(n), na):
        total += 1
        hits += abs(r[list(idx)].sum() - mean) >= obs - 1e-9
    return hits / total


def test_criterion_01_mann_whitney_exact():
    g = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst, sym = 0.0, True
    for _ in range(200):
        na = int(g.integers(1, 10))
        nb = int(g.integers(1, 11 - na))
        # small integer support forces frequent ties
        a = g.integers(0, 5, na).astype(float)
        b = g.integers(0, 5, nb).astype(float)
        ua, p = mann_whitney_u(a, b, mode="exact")
        ub, _ = mann_whitney_u(b, a, mode="exact")
        worst = max(worst, abs(p - brute_force_p(a, b)))
        sym &= ua + ub == na * nb
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and sym and elapsed < 10
    assert report(1, ok, f"max |p - oracle| = {worst:.1e}, U_a + U_b = n_a n_b: {sym}, "
                          f"{elapsed:.2f} s")


# 2. gated variance against the filtered two-pass oracle

def test_criterion_02_gated_variance():
    g = np.random.default_rng(202)
    worst, unchanged = 0.0, True
    for _ in range(1000):
        n = int(g.integers(2, 400))
        raw = g.uniform(0, 5, n)
        act = (g.random(n) < g.uniform(0.05, 1)).astype(np.int8)
        act[g.choice(n, 2, replace=False)] = 1
        table = FrameTable(np.arange(1, n + 1), np.arange(n) / 30, np.ones(n), np.ones(n, bool),
                           (6,), raw[:, None], act[:, None])
        v, missing, count = active_au_variance(table, 6)
        sub = raw[act == 1]
        mean = sub.mean()
        oracle = np.sum((sub - mean) ** 2) / (sub.size - 1)
        worst = max(worst, abs(v - oracle) / max(oracle, 1e-300))
        perturbed = raw.copy()
        perturbed[act == 0] = g.uniform(0, 5, int((act == 0).sum()))
        table.raw = perturbed[:, None]
        unchanged &= active_au_variance(table, 6) == (v, missing, count)
    ok = worst <= 1e-12 and unchanged
    assert report(2, ok, f"max relative error {worst:.1e}; inactive perturbation bit-identical: "
                          f"{unchanged}")


# 3. SVM dual solution

def brute_force_dual(K, y, C, ridge=1e-10):
    y = np.asarray(y, dtype=float)
    n = y.size
    Q = np.outer(y, y) * K + ridge * np.eye(n)
    best = np.inf
    for state in itertools.product((0, 1, 2), repeat=n):
        state = np.array(state)
        F = np.flatnonzero(state == 2)
        a = np.where(state == 1, C, 0.0)
        if F.size:
            m = F.size
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(F, F)]
            A[:m, m] = A[m, :m] = y[F]
            try:
                sol = np.linalg.solve(A, np.r_[1.0 - Q[F] @ a, -y @ a])
            except np.linalg.LinAlgError:
                continue
            a[F] = sol[:m]
            if (a[F] < -1e-12).any() or (a[F] > C + 1e-12).any():
                continue
        elif abs(y @ a) > 1e-12:
            continue
        best = min(best, 0.5 * a @ Q @ a - a.sum())
    return best


def test_criterion_03_svm():
    t0 = time.perf_counter()
    X = np.array([[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]])
    y = np.array([-1, -1, 1, 1])
    m = train_svm(X, y, kernel="linear", C=10, tol=1e-9)
    hand = max(abs(predict(m, np.array(x))[1] - f)
               for x, f in [((1.0, 0.5), 0.0), ((0.0, 0.0), -1.0), ((2.0, 1.0), 1.0)])
    margin = 2 / np.linalg.norm(m.dual_coef @ m.support_vectors)
    g = np.random.default_rng(303)
    worst = 0.0
    for _ in range(100):
        n = int(g.integers(2, 9))
        Xr = g.normal(size=(n, 2))
        yr = g.choice([-1, 1], n)
        yr[:2] = (1, -1)
        mr = train_svm(Xr, yr, kernel="linear", C=10, tol=1e-6)
        ref = brute_force_dual(kernel_matrix(Xr, Xr, "linear"), yr, 10)
        worst = max(worst, abs(mr.objective - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    ok = hand <= 1e-6 and abs(margin - 2) <= 1e-6 and worst <= 1e-4 and elapsed < 30
    assert report(3, ok, f"hand instance max |f - f*| = {hand:.1e}, margin {margin:.6f}; "
                          f"dual objective max rel. error {worst:.1e}; {elapsed:.1f} s")


# 4. logistic regression

def test_criterion_04_logistic():
    g = np.random.default_rng(404)
    X = g.normal(size=(100, 3))
    yb = (g.random(100) < 0.35).astype(float)
    A = design(X)
    h = 1e-5
    grad_err = 0.0
    for _ in range(20):
        beta = g.normal(size=4)
        an = score(beta, A, yb)
        fd = np.array([(log_likelihood(beta + h * e, A, yb) - log_likelihood(beta - h * e, A, yb))
                       / (2 * h) for e in np.eye(4)])
        grad_err = max(grad_err, np.max(np.abs(an - fd)) / max(1.0, np.max(np.abs(an))))

    y0 = np.r_[np.ones(30), np.zeros(70)]
    icpt = fit_logistic(np.empty((100, 0)), y0).intercept
    icpt_err = abs(icpt - np.log(0.3 / 0.7))

    ps = []
    for seed in range(200):
        gs = np.random.default_rng(seed)
        x = gs.normal(size=(500, 1))
        yn = (gs.random(500) < 0.5).astype(float)
        ps.append(fit_logistic(x, yn).p_values[0])
    ks = kstest(ps, "uniform").statistic
    ok = grad_err <= 1e-6 and icpt_err <= 1e-6 and ks < 0.1
    assert report(4, ok, f"gradient rel. error {grad_err:.1e}; intercept error {icpt_err:.1e}; "
                          f"null Wald p KS distance {ks:.3f}")


# 5. SMOTE

def test_criterion_05_smote():
    g = np.random.default_rng(505)
    X = g.gamma(2, 0.1, size=(604, 9))
    y = np.arange(604) < 61
    Xa, ya, flag = balance(X, y, SmoteConfig(5, RandomStream(5)))
    pts, pairs = smote(X[y], 482, SmoteConfig(5, RandomStream(5)))
    a, b = X[y][pairs[:, 0]], X[y][pairs[:, 1]]
    between = bool(np.all((pts >= np.minimum(a, b)) & (pts <= np.maximum(a, b))))
    same = np.array_equal(Xa[flag], pts)
    n_new = int(flag.sum())
    ok = between and same and n_new == 482 and ya.sum() == 543
    assert report(5, ok, f"segment betweenness exact: {between}; 61 -> {int(ya.sum())} with "
                          f"{n_new} synthetic points")


# 6. PCA and k-means

def test_criterion_06_pca_kmeans():
    g = np.random.default_rng(606)
    resid = 0.0
    for _ in range(200):
        B = g.normal(size=(30, 9)) * g.uniform(0.01, 3, 9)
        S = np.cov(B, rowvar=False)
        S = (S + S.T) / 2
        w, V = symmetric_eigen(S)
        resid = max(resid, np.linalg.norm(S @ V - V * w) / np.linalg.norm(S))
    mono = True
    for r in range(100):
        P = g.normal(size=(int(g.integers(10, 100)), 2)) * g.uniform(0.1, 5, 2)
        part = lloyd(P, kmeans_pp_init(P, int(g.integers(2, 8)), RandomStream(r).generator()))
        mono &= bool(np.all(np.diff(part.history) <= 0))
    centers = np.array([[0.0, 0.0], [20.0, 0.0], [10.0, 20.0]])
    truth = np.repeat(np.arange(3), 100)
    P = centers[truth] + g.normal(size=(300, 2))
    part = kmeans(P, k=3, stream=RandomStream(6))
    # a partition matches up to relabeling iff the contingency table is a permutation
    table = np.zeros((3, 3), int)
    np.add.at(table, (truth, part.assignments), 1)
    recovered = bool(np.all(np.sort(table, axis=1)[:, :2] == 0) and
                     len(set(table.argmax(axis=1))) == 3)
    ok = resid <= 1e-9 and mono and recovered
    assert report(6, ok, f"eigen residual / ||S|| max {resid:.1e}; Lloyd monotone: {mono}; "
                          f"blob recovery: {recovered}")


# 7 and 8. calibrated synthetic cohorts

@pytest.fixture(scope="module")
def synthetic_tables():
    t0 = time.perf_counter()
    tables = [generate_features(CohortSpec(seed=s)) for s in range(20)]
    return tables, time.perf_counter() - t0


def test_criterion_07_table2_reproduction(synthetic_tables):
    tables, gen_time = synthetic_tables
    t0 = time.perf_counter()
    j1, j9 = FEATURE_NAMES.index("smile_au01"), FEATURE_NAMES.index("disgust_au09")
    smile = disgust = 0
    for t in tables:
        pd = t.labels
        smile += mann_whitney_u(t.X[pd, j1], t.X[~pd, j1])[1] < 0.05
        disgust += mann_whitney_u(t.X[pd, j9], t.X[~pd, j9])[1] > 0.05
    elapsed = gen_time + time.perf_counter() - t0
    ok = smile >= 18 and disgust >= 15 and elapsed < 120
    assert report(7, ok, f"Smile-AU01 p < 0.05 in {smile}/20; Disgust-AU09 p > 0.05 in "
                          f"{disgust}/20; {elapsed:.1f} s")


def test_criterion_08_logistic_direction(synthetic_tables):
    tables, _ = synthetic_tables
    j6, j12 = FEATURE_NAMES.index("smile_au06"), FEATURE_NAMES.index("smile_au12")
    hits = 0
    for t in tables:
        fit = regress(t)
        hits += fit.coefficients[j6] < 0 and fit.coefficients[j12] < 0
    ok = hits >= 18
    assert report(8, ok, f"Smile-AU06 and Smile-AU12 weights both negative in {hits}/20")


# 9 and 10. CLI determinism and reference metadata

@pytest.fixture(scope="module")
def report_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("accept")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["synth", "--seed", "9", "--n-pd", "20", "--n-nonpd", "40",
                     "--out", str(base / "cohort")]) == 0
        runs = []
        for i, threads in enumerate(("1", "2", "1")):
            out = base / f"run{i}"
            code = main(["report", "--manifest", str(base / "cohort" / "manifest.json"),
                         "--seed", "9", "--threads", threads, "--out", str(out)])
            assert code == 0
            runs.append(out)
    return runs


def _tree(path):
    return sorted(p.relative_to(path) for p in Path(path).rglob("*") if p.is_file())


def test_criterion_09_determinism(report_runs):
    a, b, c = report_runs
    names = _tree(a)
    same = names == _tree(b) == _tree(c)
    for other in (b, c):
        _, mismatch, errors = filecmp.cmpfiles(a, other, [str(n) for n in names], shallow=False)
        same &= not mismatch and not errors
    assert report(9, same, f"{len(names)} files byte-identical across runs "
                            f"(threads 1, 2, 1): {same}")


def test_criterion_10_reference_block(report_runs):
    doc = json.loads((report_runs[0] / "metrics.json").read_text())
    ref = doc["reference"]
    expected = {"accuracy": 0.956, "f1": 0.95, "auc": 0.94, "precision": 0.958, "recall": 0.943}
    ok = ref.get("reference_only") is True and all(ref.get(k) == v for k, v in expected.items())
    assert report(10, ok, f"metrics.json reference block {{{', '.join(f'{k}: {ref.get(k)}' for k in expected)}}}"
                           f", reference_only={ref.get('reference_only')}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
