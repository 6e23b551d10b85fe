"""Synthetic cohorts calibrated to the published group sizes and feature table."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.special import log_ndtr
from scipy.stats import norm, truncnorm

from .errors import ConfigError, DataWarning
from .features import DEFAULT_AU_MAP, FEATURE_NAMES, FeatureTable
from .ingest import (
    AU_IDS,
    AU_MAX,
    AU_MIN,
    Cohort,
    Expression,
    FrameTable,
    Participant,
    VideoRecording,
    write_au_csv,
)
from .numcore import RandomStream, sample_variance
from .reference import N_NONPD, N_PD, TABLE2

# standardized truncation point limits; see truncated_normal_params
_A_LOW = -8.0
_A_HIGH = 6.0

RISE = 0.5
HOLD = 1.5
JITTER = 0.5
ACTIVE_LEVEL = 0.5
SHAPE_NOISE = 0.02
RELAX_LEVEL = 0.5
PLATEAU = 2.5
DECIMALS = 6


def _mills(a):
    """phi(a) / (1 - Phi(a)), stable for large a."""
    return math.exp(norm.logpdf(a) - log_ndtr(-a))


def _cv(a):
    lam = _mills(a)
    return math.sqrt(max(1.0 + a * lam - lam * lam, 0.0)) / (lam - a)


def truncated_normal_params(mean, sd):
    """Parent normal ``(mu, sigma)`` whose zero-truncation has the given mean.

    The SD is matched as well when ``sd / mean`` is attainable. A normal
    truncated at zero cannot have SD above its mean, so larger ratios are
    capped at the most right-skewed shape allowed (standardized truncation
    point 6) and only the mean is exact. Returns ``(mu, sigma, sd_matched)``.
    """
    if mean <= 0 or sd <= 0:
        raise ConfigError(f"need positive mean and SD, got {mean}, {sd}")
    target = sd / mean
    if target <= _cv(_A_LOW):
        # truncation mass below 1e-15: the parent is the target itself
        return float(mean), float(sd), True
    matched = target < _cv(_A_HIGH)
    a = brentq(lambda a: _cv(a) - target, _A_LOW, _A_HIGH, xtol=1e-14) if matched else _A_HIGH
    sigma = mean / (_mills(a) - a)
    return float(-a * sigma), float(sigma), matched


def truncated_normal_moments(mu, sigma):
    a = -mu / sigma
    lam = _mills(a)
    return mu + sigma * lam, sigma * math.sqrt(1.0 + a * lam - lam * lam)


def default_cells():
    return {k: v[:4] for k, v in TABLE2.items()}


@dataclass
class CohortSpec:
    n_pd: int = N_PD
    n_nonpd: int = N_NONPD
    cells: dict = field(default_factory=default_cells)
    fps: float = 30.0
    duration: float = 11.0
    bumps: int = 3
    seed: int = 0
    correlation: np.ndarray | None = None

    def __post_init__(self):
        if self.n_pd < 1 or self.n_nonpd < 1:
            raise ConfigError("group sizes must be positive")
        for key, (pm, ps, nm, ns) in self.cells.items():
            if min(pm, nm) < 0 or min(ps, ns) <= 0:
                raise ConfigError(f"cell {key}: means must be >= 0 and SDs > 0")
        if self.correlation is not None:
            c = np.asarray(self.correlation, dtype=float)
            if c.shape != (len(FEATURE_NAMES),) * 2 or not np.allclose(np.diag(c), 1):
                raise ConfigError("correlation must be a 9x9 matrix with unit diagonal")

    @property
    def stream(self):
        return RandomStream(self.seed)

    def cell_list(self, pd):
        out = []
        for e, aus in DEFAULT_AU_MAP.items():
            for au in aus:
                pm, ps, nm, ns = self.cells[(e, au)]
                out.append((pm, ps) if pd else (nm, ns))
        return out

    def participant_ids(self):
        n = self.n_pd + self.n_nonpd
        width = max(4, len(str(n)))
        return [f"P{i + 1:0{width}d}" for i in range(n)]


def _uniforms(spec, gen):
    d = len(FEATURE_NAMES)
    if spec.correlation is None:
        return gen.random(d)
    L = np.linalg.cholesky(np.asarray(spec.correlation, dtype=float))
    return norm.cdf(L @ gen.standard_normal(d))


def generate_features(spec=None):
    """Draw a labelled feature table, one zero-truncated normal per (group, feature).

    The first ``n_pd`` participants carry the PD label. Participant ``i``
    uses its own substream, so each row is independent of the group sizes
    that follow it.
    """
    spec = spec or CohortSpec()
    params = {pd: [truncated_normal_params(m, s) for m, s in spec.cell_list(pd)]
              for pd in (True, False)}
    ids = spec.participant_ids()
    labels = np.arange(len(ids)) < spec.n_pd
    U = np.array([_uniforms(spec, spec.stream.substream(("features", i)).generator())
                  for i in range(len(ids))]).reshape(len(ids), len(FEATURE_NAMES))
    U = np.clip(U, 1e-300, 1 - 1e-16)
    X = np.empty_like(U)
    for pd in (True, False):
        rows = labels == pd
        for j, (mu, sigma, _) in enumerate(params[pd]):
            X[rows, j] = truncnorm.ppf(U[rows, j], -mu / sigma, np.inf, loc=mu, scale=sigma)
    X = np.maximum(X, 0.0)
    return FeatureTable(ids, labels, X, np.zeros_like(X, dtype=bool), FEATURE_NAMES)


def bump_envelope(t, starts):
    """Sum of rise-hold-fall bumps (raised-cosine edges) starting at ``starts``."""
    e = np.zeros_like(t)
    for s in starts:
        x = t - s
        rise = (x >= 0) & (x < RISE)
        hold = (x >= RISE) & (x <= RISE + HOLD)
        fall = (x > RISE + HOLD) & (x <= 2 * RISE + HOLD)
        e[rise] = 0.5 - 0.5 * np.cos(np.pi * x[rise] / RISE)
        e[hold] = 1.0
        e[fall] = 0.5 + 0.5 * np.cos(np.pi * (x[fall] - RISE - HOLD) / RISE)
    return np.minimum(e, 1.0)


def relax_profile(t, starts):
    """1 while an expression builds, ``RELAX_LEVEL`` from mid-hold until it ends.

    A two-level plateau keeps the active-frame distribution compact, so
    large variance targets fit inside [0, 5].
    """
    f = np.ones_like(t)
    for s in starts:
        x = t - s
        f[(x > RISE + HOLD / 2) & (x <= 2 * RISE + HOLD)] = RELAX_LEVEL
    return f


def bump_starts(spec, gen):
    period = spec.duration / spec.bumps
    width = 2 * RISE + HOLD
    centres = (np.arange(spec.bumps) + 0.5) * period + gen.uniform(-JITTER, JITTER, spec.bumps)
    return np.clip(centres - width / 2, 0.0, spec.duration - width)


def _shape_trace(envelope, shape_env, active, target_var, noise):
    """Magnitudes whose active-frame sample variance equals ``target_var``.

    Active frames follow the standardized ``shape_env``-plus-noise shape, scaled
    and centred inside [0, 5]; inactive frames ramp up to just below the
    lowest active value. Values are rounded to ``DECIMALS`` places and the
    scale is refined against the rounded result. Returns ``(trace, clipped)``.
    """
    shape = shape_env[active] + SHAPE_NOISE * noise[active]
    z = shape - shape.mean()
    zsd = z.std(ddof=1)
    z = z / zsd if zsd > 0 else np.zeros_like(z)
    zmin, zmax = (z.min(), z.max()) if z.size else (0.0, 0.0)
    s = math.sqrt(target_var)
    for _ in range(30):
        lo_c, hi_c = AU_MIN - s * zmin, AU_MAX - s * zmax
        if lo_c <= hi_c:
            c = min(max(PLATEAU, lo_c), hi_c)
        else:
            c = (AU_MIN + AU_MAX) / 2 - s * (zmax + zmin) / 2
        act = np.round(np.clip(c + s * z, AU_MIN, AU_MAX), DECIMALS)
        got = sample_variance(act) if act.size > 1 else 0.0
        if target_var == 0 or got == 0 or abs(got / target_var - 1) < 1e-9:
            break
        s *= math.sqrt(target_var / got)
    clipped = lo_c > hi_c
    floor = act.min() if act.size else 0.0
    ramp = 0.9 * floor * np.minimum(envelope / ACTIVE_LEVEL, 1.0)
    trace = np.round(np.clip(ramp, AU_MIN, AU_MAX), DECIMALS)
    trace[active] = act
    return trace, clipped


def synth_recording(spec, participant_id, expression, targets, gen):
    """One recording; ``targets`` maps each mapped AU to its gated variance."""
    n = int(round(spec.duration * spec.fps))
    t = np.round(np.arange(n) / spec.fps, 6)
    starts = bump_starts(spec, gen)
    env = bump_envelope(t, starts)
    shape_env = env * relax_profile(t, starts)
    active = env >= ACTIVE_LEVEL
    raw = np.zeros((n, len(AU_IDS)))
    act = np.zeros((n, len(AU_IDS)), dtype=np.int8)
    clipped = []
    for j, au in enumerate(AU_IDS):
        noise = gen.standard_normal(n)
        if au in targets:
            raw[:, j], c = _shape_trace(env, shape_env, active, targets[au], noise)
            act[:, j] = active
            if c:
                clipped.append(au)
        else:
            raw[:, j] = np.round(np.minimum(np.abs(0.03 * noise), AU_MAX), DECIMALS)
    table = FrameTable(
        frame_index=np.arange(1, n + 1),
        timestamp=t,
        confidence=np.round(gen.uniform(0.88, 0.99, n), 2),
        success=np.ones(n, dtype=bool),
        aus=AU_IDS,
        raw=raw,
        active=act,
    )
    return VideoRecording(participant_id, expression, table), clipped


def generate_recordings(spec=None, out_dir=None, features=None):
    """Frame-level cohort whose gated variances reproduce ``generate_features``.

    Parameters
    ----------
    spec : CohortSpec
    out_dir : path, optional
        When given, writes ``manifest.json``, ``targets.csv`` and one CSV per
        recording under ``csv/``.
    features : FeatureTable, optional
        Targets to realise; drawn with ``generate_features(spec)`` by default.

    Returns
    -------
    cohort : Cohort
    targets : FeatureTable
    """
    spec = spec or CohortSpec()
    targets = features if features is not None else generate_features(spec)
    cohort = Cohort()
    n_clipped = 0
    for i, pid in enumerate(targets.ids):
        cohort.add_participant(Participant(pid, bool(targets.labels[i])))
        gen = spec.stream.substream(("recordings", i)).generator()
        col = 0
        for e, aus in DEFAULT_AU_MAP.items():
            cell = dict(zip(aus, targets.X[i, col:col + len(aus)]))
            col += len(aus)
            rec, clipped = synth_recording(spec, pid, e, cell, gen)
            cohort.add_recording(rec)
            n_clipped += len(clipped)
    if n_clipped:
        warnings.warn(f"{n_clipped} AU traces clipped to [0, 5]; their variance targets are "
                      "not met exactly", DataWarning, stacklevel=2)
    if out_dir is not None:
        write_cohort(cohort, out_dir)
        (Path(out_dir) / "targets.csv").write_text(targets.to_csv(), encoding="utf-8")
    return cohort, targets


def write_cohort(cohort, out_dir):
    out = Path(out_dir)
    (out / "csv").mkdir(parents=True, exist_ok=True)
    recs = []
    for (pid, e), rec in sorted(cohort.recordings.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        rel = f"csv/{pid}_{e.value}.csv"
        write_au_csv(out / rel, rec.frames)
        recs.append({"participant_id": pid, "expression": e.value, "csv": rel})
    manifest = {
        "participants": [{"id": p.id, "pd_label": p.pd_label}
                         for p in sorted(cohort.participants.values(), key=lambda p: p.id)],
        "recordings": recs,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return out / "manifest.json"
