"""Activation-gated AU variance features and the three-peak QC diagnostic."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from .errors import ConfigError, InvalidValueError, MissingChannelError
from .ingest import AU_IDS, Expression
from .numcore import sample_variance

DEFAULT_AU_MAP = {
    Expression.SMILE: (1, 6, 12),
    Expression.DISGUST: (4, 7, 9),
    Expression.SURPRISE: (1, 2, 4),
}

MIN_ACTIVE_FRAMES = 2

PEAK_WINDOW = 5
PEAK_PROMINENCE = 0.2
PEAK_MIN_GAP = 1.0


def check_au_map(au_map):
    au_map = {Expression.parse(e): tuple(aus) for e, aus in au_map.items()}
    for e, aus in au_map.items():
        if len(aus) != 3 or len(set(aus)) != 3:
            raise ConfigError(f"{e.value}: expected exactly 3 distinct AUs, got {aus}")
        unknown = set(aus) - set(AU_IDS)
        if unknown:
            raise ConfigError(f"{e.value}: AU ids {sorted(unknown)} not in {AU_IDS}")
    return au_map


def feature_names(au_map=DEFAULT_AU_MAP):
    """Canonical column names, e.g. ``smile_au01``, in map order."""
    return tuple(f"{e.value}_au{au:02d}" for e, aus in au_map.items() for au in aus)


FEATURE_NAMES = feature_names()


def active_au_variance(recording, au):
    """Variance of one AU's raw magnitude over frames where it is active.

    Parameters
    ----------
    recording : VideoRecording or FrameTable
    au : int

    Returns
    -------
    value : float
        Sample variance, or 0.0 when fewer than two frames are active.
    missing : bool
        True when the variance is undefined (fewer than two active frames).
    active_frame_count : int
    """
    frames = getattr(recording, "frames", recording)
    try:
        raw, active = frames.channel(au)
    except ValueError:
        raise MissingChannelError(f"AU{au:02d} channel absent from recording") from None
    gated = raw[active == 1]
    n = int(gated.size)
    if n < MIN_ACTIVE_FRAMES:
        return 0.0, True, n
    return sample_variance(gated), False, n


@dataclass
class FeatureVector:
    participant_id: str
    values: np.ndarray
    missing_mask: np.ndarray


def build_feature_vector(participant_id, recordings, au_map=DEFAULT_AU_MAP):
    """Assemble the feature vector of one participant.

    ``recordings`` maps expression to recording. Returns None when an
    expression of ``au_map`` has no recording (the caller counts the
    exclusion).
    """
    values, missing = [], []
    for expr, aus in au_map.items():
        rec = recordings.get(expr)
        if rec is None:
            return None
        for au in aus:
            v, m, _ = active_au_variance(rec, au)
            values.append(v)
            missing.append(m)
    return FeatureVector(participant_id, np.array(values), np.array(missing, dtype=bool))


@dataclass
class FeatureTable:
    """Per-participant feature matrix with labels, in participant id order."""

    ids: list
    labels: np.ndarray
    X: np.ndarray
    missing: np.ndarray
    names: tuple = FEATURE_NAMES
    excluded: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=bool)
        self.X = np.asarray(self.X, dtype=float).reshape(len(self.ids), len(self.names))
        self.missing = np.asarray(self.missing, dtype=bool).reshape(self.X.shape)
        if not np.isfinite(self.X).all() or (self.X < 0).any():
            raise InvalidValueError("feature values must be finite and non-negative")

    def __len__(self):
        return len(self.ids)

    def subset(self, mask):
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask
        return FeatureTable([self.ids[i] for i in idx], self.labels[idx], self.X[idx],
                            self.missing[idx], self.names, dict(self.excluded))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["participant_id", "pd_label", *self.names, "missing_count"])
        for i, pid in enumerate(self.ids):
            w.writerow([pid, int(self.labels[i]), *(repr(float(v)) for v in self.X[i]),
                        int(self.missing[i].sum())])
        return buf.getvalue()

    def to_json(self):
        rows = [{
            "participant_id": pid,
            "pd_label": bool(self.labels[i]),
            "values": dict(zip(self.names, map(float, self.X[i]))),
            "missing": [n for n, m in zip(self.names, self.missing[i]) if m],
        } for i, pid in enumerate(self.ids)]
        return {"features": list(self.names), "participants": rows,
                "excluded": dict(sorted(self.excluded.items()))}

    @classmethod
    def from_csv(cls, source):
        """Read a table written by :meth:`to_csv`.

        Which cells were masked is not stored per cell in CSV; zero cells
        are marked missing while ``missing_count`` is positive.
        """
        text = source.read() if hasattr(source, "read") else Path(source).read_text(encoding="utf-8")
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        names = tuple(header[2:-1])
        ids, labels, X, missing = [], [], [], []
        for r in body:
            ids.append(r[0])
            labels.append(bool(int(r[1])))
            x = np.array([float(v) for v in r[2:-1]])
            X.append(x)
            missing.append((x == 0) & (int(r[-1]) > 0))
        return cls(ids, labels, np.array(X).reshape(len(ids), len(names)),
                   np.array(missing).reshape(len(ids), len(names)), names)


def extract_features(cohort, au_map=DEFAULT_AU_MAP):
    """Feature table for every participant with a complete set of recordings."""
    au_map = check_au_map(au_map)
    ids, X, missing = [], [], []
    excluded = {}
    for pid in cohort.participant_ids():
        fv = build_feature_vector(pid, cohort.recordings_for(pid), au_map)
        if fv is None:
            have = set(cohort.recordings_for(pid))
            lacking = [e.value for e in au_map if e not in have]
            excluded[pid] = "missing recordings: " + ", ".join(lacking)
            continue
        ids.append(pid)
        X.append(fv.values)
        missing.append(fv.missing_mask)
    names = feature_names(au_map)
    d = len(names)
    return FeatureTable(ids, cohort.labels(ids), np.array(X).reshape(-1, d),
                        np.array(missing, dtype=bool).reshape(-1, d), names, excluded)


@dataclass
class PeakReport:
    count: int
    times: np.ndarray
    indices: np.ndarray


def detect_peaks(values, timestamps, window=PEAK_WINDOW, prominence=PEAK_PROMINENCE,
                 min_gap=PEAK_MIN_GAP):
    """Find distinct peaks in an AU magnitude trace.

    The trace is smoothed with a centred moving average of ``window`` frames.
    Local maxima whose prominence is at least ``prominence`` times the
    smoothed range are kept, then thinned greedily (highest first) so that
    kept peaks are at least ``min_gap`` seconds apart.
    """
    if not isinstance(window, (int, np.integer)) or window < 1:
        raise ConfigError(f"smoothing window must be a positive integer, got {window!r}")
    if not 0 < prominence <= 1:
        raise ConfigError(f"prominence fraction must lie in (0, 1], got {prominence!r}")
    x = np.asarray(values, dtype=float)
    t = np.asarray(timestamps, dtype=float)
    if x.size < window:
        raise InvalidValueError(f"series of length {x.size} shorter than window {window}")
    smooth = uniform_filter1d(x, size=window, mode="nearest")
    span = smooth.max() - smooth.min()
    if span <= 0:
        return PeakReport(0, np.empty(0), np.empty(0, dtype=int))
    idx, _ = find_peaks(smooth, prominence=prominence * span)
    keep = []
    for i in sorted(idx, key=lambda i: (-smooth[i], i)):
        if all(abs(t[i] - t[k]) >= min_gap for k in keep):
            keep.append(i)
    keep = np.array(sorted(keep), dtype=int)
    return PeakReport(len(keep), t[keep], keep)


def qc_expression_association(cohort, au_map=DEFAULT_AU_MAP, aus=AU_IDS, **peak_kw):
    """Fraction of recordings per (expression, AU) whose trace has exactly three peaks.

    Diagnostic only. Expressions without recordings produce no rows; their
    count of 0 is still reported in ``recording_counts``.

    Returns
    -------
    dict with keys ``rows`` (list of dicts) and ``recording_counts``.
    """
    au_map = check_au_map(au_map)
    by_expr = {e: [] for e in Expression}
    for (_, e), rec in sorted(cohort.recordings.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        by_expr[e].append(rec)
    rows = []
    for e in Expression:
        recs = by_expr[e]
        if not recs:
            continue
        for au in aus:
            hits = 0
            for rec in recs:
                raw, _ = rec.frames.channel(au)
                if detect_peaks(raw, rec.frames.timestamp, **peak_kw).count == 3:
                    hits += 1
            rows.append({"expression": e.value, "au": au, "mapped": au in au_map.get(e, ()),
                         "n_recordings": len(recs), "fraction_three_peaks": hits / len(recs)})
    return {"rows": rows, "recording_counts": {e.value: len(by_expr[e]) for e in Expression}}
