import numpy as np
import pytest

from hypomimia.ingest import AU_IDS, Expression, FrameTable, VideoRecording


def make_frames(raw, active, aus=(6,), fps=30.0):
    """FrameTable from per-AU columns given as (n, len(aus)) arrays or 1-D for one AU."""
    raw = np.asarray(raw, dtype=float)
    active = np.asarray(active, dtype=np.int8)
    if raw.ndim == 1:
        raw, active = raw[:, None], active[:, None]
    n = raw.shape[0]
    return FrameTable(
        frame_index=np.arange(1, n + 1),
        timestamp=np.arange(n) / fps,
        confidence=np.full(n, 0.95),
        success=np.ones(n, dtype=bool),
        aus=tuple(aus),
        raw=raw,
        active=active,
    )


def make_recording(pid, expression, raw, active, aus=AU_IDS):
    return VideoRecording(pid, Expression.parse(expression), make_frames(raw, active, aus))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
