"""Reading OpenFace-style action unit CSV files and cohort manifests."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import (
    ConflictError,
    DataWarning,
    EmptyRecordingError,
    InvalidValueError,
    ReferentialError,
    RowError,
    SchemaError,
)

AU_IDS = (1, 2, 4, 6, 7, 9, 12)
AU_MIN, AU_MAX = 0.0, 5.0
DEFAULT_CONFIDENCE = 0.75
EXPECTED_DURATION = (8.0, 16.0)


class Expression(str, Enum):
    SMILE = "smile"
    DISGUST = "disgust"
    SURPRISE = "surprise"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidValueError(f"unknown expression {value!r}") from None


def au_name(au, suffix):
    return f"AU{au:02d}_{suffix}"


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    timestamp: float
    confidence: float
    success: bool
    au_raw: dict
    au_active: dict


@dataclass
class FrameTable:
    """Column-oriented frames of one video, sorted by timestamp.

    Behaves as a sequence of :class:`FrameRecord`; the numeric columns are
    exposed directly for vectorised work. ``raw[:, j]`` and ``active[:, j]``
    hold the channels for ``aus[j]``.
    """

    frame_index: np.ndarray
    timestamp: np.ndarray
    confidence: np.ndarray
    success: np.ndarray
    aus: tuple
    raw: np.ndarray
    active: np.ndarray
    dropped: int = 0
    clamped: int = 0
    source: str | None = None

    def __len__(self):
        return len(self.timestamp)

    def __getitem__(self, i):
        return FrameRecord(
            frame_index=int(self.frame_index[i]),
            timestamp=float(self.timestamp[i]),
            confidence=float(self.confidence[i]),
            success=bool(self.success[i]),
            au_raw={au: float(self.raw[i, j]) for j, au in enumerate(self.aus)},
            au_active={au: int(self.active[i, j]) for j, au in enumerate(self.aus)},
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def channel(self, au):
        """Return ``(raw, active)`` arrays for one AU, or raise KeyError."""
        j = self.aus.index(au)
        return self.raw[:, j], self.active[:, j]

    @property
    def duration(self):
        return float(self.timestamp[-1] - self.timestamp[0]) if len(self) else 0.0


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8"), str(source)
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"), newline=""), None
    name = getattr(source, "name", None)
    if isinstance(source, io.TextIOBase):
        return source, name
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), name


def parse_au_csv(source, required_aus=AU_IDS, confidence_threshold=DEFAULT_CONFIDENCE):
    """Parse one OpenFace AU output file.

    Parameters
    ----------
    source : path, bytes or file object
        Comma-separated text with a header row. A single space after each
        comma (the OpenFace default) is accepted.
    required_aus : iterable of int
        Both ``AUnn_r`` and ``AUnn_c`` must be present for every id.
    confidence_threshold : float
        Rows with ``success == 0`` or confidence below this are dropped.

    Returns
    -------
    FrameTable
    """
    aus = tuple(sorted(set(required_aus)))
    fh, name = _open_text(source)
    own = isinstance(source, (str, os.PathLike))
    try:
        reader = csv.reader(fh, skipinitialspace=True)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError("frame", name) from None
        col = {h: i for i, h in enumerate(header)}
        needed = ["frame", "timestamp", "confidence", "success"]
        for au in aus:
            needed += [au_name(au, "r"), au_name(au, "c")]
        for c in needed:
            if c not in col:
                raise SchemaError(c, name)
        idx_raw = [col[au_name(au, "r")] for au in aus]
        idx_act = [col[au_name(au, "c")] for au in aus]
        i_frame, i_ts, i_conf, i_succ = (col[c] for c in needed[:4])
        width = max(col.values()) + 1

        frames, ts, conf, succ, raws, acts = [], [], [], [], [], []
        dropped = 0
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            line = reader.line_num
            if len(row) < width:
                raise RowError(line, f"expected {len(header)} cells, got {len(row)}", name)
            try:
                frame = float(row[i_frame])
                t = float(row[i_ts])
                c = float(row[i_conf])
                s = float(row[i_succ])
                r = [float(row[k]) for k in idx_raw]
                a = [float(row[k]) for k in idx_act]
            except ValueError as exc:
                raise RowError(line, f"unparsable number ({exc})", name) from None
            if s not in (0.0, 1.0):
                raise RowError(line, f"success must be 0 or 1, got {row[i_succ]!r}", name)
            if any(v not in (0.0, 1.0) for v in a):
                raise RowError(line, "AU activation must be 0 or 1", name)
            if not all(map(math.isfinite, (frame, t, c, *r))) or frame != int(frame) or frame < 1 or t < 0:
                raise RowError(line, "invalid frame, timestamp or magnitude", name)
            if not 0.0 <= c <= 1.0:
                raise RowError(line, f"confidence {c} outside [0, 1]", name)
            if s == 0.0 or c < confidence_threshold:
                dropped += 1
                continue
            frames.append(int(frame))
            ts.append(t)
            conf.append(c)
            succ.append(True)
            raws.append(r)
            acts.append(a)
    finally:
        if own:
            fh.close()

    if not ts:
        raise EmptyRecordingError(f"no usable frames in {name or 'input'} ({dropped} dropped)")
    ts = np.array(ts)
    order = np.argsort(ts, kind="stable")
    ts = ts[order]
    if np.any(np.diff(ts) <= 0):
        raise InvalidValueError(f"timestamps not strictly increasing in {name or 'input'}")
    raw = np.array(raws, dtype=float).reshape(len(order), len(aus))[order]
    bad = (raw < AU_MIN) | (raw > AU_MAX)
    clamped = int(bad.sum())
    if clamped:
        raw = np.clip(raw, AU_MIN, AU_MAX)
        warnings.warn(f"{name or 'input'}: {clamped} AU magnitudes clamped to [0, 5]",
                      DataWarning, stacklevel=2)
    return FrameTable(
        frame_index=np.array(frames, dtype=np.int64)[order],
        timestamp=ts,
        confidence=np.array(conf)[order],
        success=np.array(succ, dtype=bool)[order],
        aus=aus,
        raw=raw,
        active=np.array(acts, dtype=np.int8).reshape(len(order), len(aus))[order],
        dropped=dropped,
        clamped=clamped,
        source=name,
    )


def write_au_csv(target, table):
    """Write a :class:`FrameTable` in OpenFace column layout.

    Values are written with ``repr`` so a re-parse restores identical floats.
    """
    header = ["frame", "face_id", "timestamp", "confidence", "success"]
    header += [au_name(au, "r") for au in table.aus] + [au_name(au, "c") for au in table.aus]
    lines = [", ".join(header)]
    for i in range(len(table)):
        cells = [str(int(table.frame_index[i])), "0", repr(float(table.timestamp[i])),
                 repr(float(table.confidence[i])), "1" if table.success[i] else "0"]
        cells += [repr(float(v)) for v in table.raw[i]]
        cells += [str(int(v)) for v in table.active[i]]
        lines.append(", ".join(cells))
    text = "\n".join(lines) + "\n"
    if isinstance(target, (str, os.PathLike)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


@dataclass
class VideoRecording:
    participant_id: str
    expression: Expression
    frames: FrameTable

    def __post_init__(self):
        self.expression = Expression.parse(self.expression)
        lo, hi = EXPECTED_DURATION
        d = self.frames.duration
        self.duration_warning = not lo <= d <= hi
        if self.duration_warning:
            warnings.warn(
                f"{self.participant_id}/{self.expression.value}: duration {d:.2f}s outside "
                f"[{lo:g}, {hi:g}]s", DataWarning, stacklevel=2)

    @property
    def duration(self):
        return self.frames.duration

    @property
    def fps(self):
        n = len(self.frames)
        return (n - 1) / self.duration if n > 1 and self.duration > 0 else float("nan")


@dataclass(frozen=True)
class Participant:
    id: str
    pd_label: bool
    age: float | None = None
    gender: str | None = None
    race: str | None = None
    country: str | None = None


@dataclass
class Cohort:
    participants: dict = field(default_factory=dict)
    recordings: dict = field(default_factory=dict)
    parse_stats: dict = field(default_factory=dict)

    def add_participant(self, p):
        if p.id in self.participants:
            raise ConflictError(f"duplicate participant id {p.id!r}")
        self.participants[p.id] = p

    def add_recording(self, rec):
        if rec.participant_id not in self.participants:
            raise ReferentialError(f"recording references unknown participant {rec.participant_id!r}")
        key = (rec.participant_id, rec.expression)
        if key in self.recordings:
            raise ConflictError(
                f"duplicate recording for ({rec.participant_id!r}, {rec.expression.value!r})")
        self.recordings[key] = rec

    def recordings_for(self, participant_id):
        return {e: r for (pid, e), r in self.recordings.items() if pid == participant_id}

    def participant_ids(self):
        return sorted(self.participants)

    def labels(self, ids=None):
        ids = self.participant_ids() if ids is None else ids
        return np.array([self.participants[i].pd_label for i in ids], dtype=bool)


def manifest_schema():
    return json.loads(resources.files(__package__).joinpath("schemas/manifest.schema.json").read_text())


def load_cohort(manifest_path, confidence_threshold=DEFAULT_CONFIDENCE, threads=1):
    """Load and validate a cohort manifest and every CSV it lists.

    Relative CSV paths resolve against the manifest's directory. Files are
    parsed independently (in up to ``threads`` worker threads) and then
    assembled in manifest order.
    """
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    try:
        jsonschema.validate(doc, manifest_schema())
    except jsonschema.ValidationError as exc:
        raise InvalidValueError(f"{manifest_path}: invalid manifest: {exc.message}") from None

    cohort = Cohort()
    for p in doc["participants"]:
        cohort.add_participant(Participant(
            id=p["id"], pd_label=bool(p["pd_label"]), age=p.get("age"),
            gender=p.get("gender"), race=p.get("race"), country=p.get("country")))

    entries = doc["recordings"]
    seen = set()
    for e in entries:
        if e["participant_id"] not in cohort.participants:
            raise ReferentialError(f"recording references unknown participant {e['participant_id']!r}")
        key = (e["participant_id"], Expression.parse(e["expression"]))
        if key in seen:
            raise ConflictError(f"duplicate recording for ({key[0]!r}, {key[1].value!r})")
        seen.add(key)

    base = manifest_path.parent

    def parse(entry):
        path = Path(entry["csv"])
        if not path.is_absolute():
            path = base / path
        return parse_au_csv(path, AU_IDS, confidence_threshold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(parse, entries))
    else:
        tables = [parse(e) for e in entries]

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DataWarning)
        for e, table in zip(entries, tables):
            rec = VideoRecording(e["participant_id"], e["expression"], table)
            cohort.add_recording(rec)
            cohort.parse_stats[e["csv"]] = {
                "participant_id": e["participant_id"],
                "expression": rec.expression.value,
                "frames": len(table),
                "dropped": table.dropped,
                "clamped": table.clamped,
                "duration": table.duration,
                "duration_warning": rec.duration_warning,
            }
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    return cohort
