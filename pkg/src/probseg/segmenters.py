"""Decoders mapping a probability stream to a segment list.

``pdac`` and ``pstrm`` are length-driven baselines; ``pthr`` and
``pthr_ma`` let the probabilities decide where segments open and close,
using ``max``/``min`` only as safeguards.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from probseg.frames import AudioSpec, DEFAULT_SPEC, ProbStream, Segment, SegmentList, seconds_to_frames
from probseg.smoothing import moving_average

ALGORITHMS = ("pdac", "pstrm", "pthr", "pthr_ma")

# seconds; max/min follow the tuned settings, thr/n_ma the best dev rows
DEFAULT_MAX_S = 28.0
DEFAULT_MIN_S = 0.2
DEFAULT_THR = {"pdac": 0.5, "pstrm": 0.5, "pthr": 0.1, "pthr_ma": 0.1}
DEFAULT_N_MA_S = {"pdac": 0.0, "pstrm": 0.0, "pthr": 0.0, "pthr_ma": 0.1}
LERP_MIN_FRAC = 0.1
LERP_MAX_FRAC = 0.2


@dataclass(frozen=True)
class SegmenterConfig:
    """Decoder hyperparameters. Lengths are in frames."""

    max: int
    min: int
    thr: float
    n_ma: int = 0
    lerp_min: int | None = None
    lerp_max: int | None = None
    algorithm: str = "pthr_ma"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        for name in ("max", "min", "n_ma"):
            v = getattr(self, name)
            if int(v) != v:
                raise ValueError(f"{name} must be a whole number of frames, got {v}")
        if self.max < 1:
            raise ValueError(f"max must be at least 1 frame, got {self.max}")
        span = self.max - self.min
        if self.lerp_min is None:
            object.__setattr__(self, "lerp_min", self.min + int(LERP_MIN_FRAC * span + 0.5))
        if self.lerp_max is None:
            object.__setattr__(self, "lerp_max", self.max - int(LERP_MAX_FRAC * span + 0.5))
        if not (0 <= self.min <= self.lerp_min <= self.lerp_max <= self.max):
            raise ValueError(
                "need 0 <= min <= lerp_min <= lerp_max <= max, got "
                f"min={self.min} lerp_min={self.lerp_min} lerp_max={self.lerp_max} max={self.max}"
            )
        if not (0.0 < self.thr < 1.0):
            raise ValueError(f"thr must lie in (0, 1), got {self.thr}")
        if self.n_ma < 0:
            raise ValueError(f"n_ma must be >= 0, got {self.n_ma}")

    @classmethod
    def from_seconds(
        cls,
        algorithm: str = "pthr_ma",
        max: float = DEFAULT_MAX_S,
        min: float = DEFAULT_MIN_S,
        thr: float | None = None,
        n_ma: float | None = None,
        lerp_min: float | None = None,
        lerp_max: float | None = None,
        spec: AudioSpec = DEFAULT_SPEC,
    ) -> "SegmenterConfig":
        """Build a config from second-valued settings, filling per-algorithm defaults."""
        if algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        f = lambda t: None if t is None else seconds_to_frames(t, spec)  # noqa: E731
        return cls(
            max=f(max),
            min=f(min),
            thr=DEFAULT_THR[algorithm] if thr is None else thr,
            n_ma=f(DEFAULT_N_MA_S[algorithm] if n_ma is None else n_ma),
            lerp_min=f(lerp_min),
            lerp_max=f(lerp_max),
            algorithm=algorithm,
        )

    def with_(self, **changes) -> "SegmenterConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class ThresholdFilter:
    """Closing threshold indexed by offset from the segment start."""

    thrs: np.ndarray

    def __len__(self) -> int:
        return int(self.thrs.shape[0])


def build_threshold_filter(cfg: SegmenterConfig) -> ThresholdFilter:
    """Zero below ``min``, ramp up to ``thr`` at ``lerp_min``, flat, then ramp to 1.

    The last ramp reaches exactly 1 at offset ``max - 1``.
    """
    thrs = np.full(cfg.max, cfg.thr, dtype=np.float64)
    thrs[: cfg.min] = 0.0
    if cfg.lerp_min > cfg.min:
        i = np.arange(cfg.min, cfg.lerp_min)
        thrs[cfg.min : cfg.lerp_min] = cfg.thr * (i - cfg.min) / (cfg.lerp_min - cfg.min)
    if cfg.max > cfg.lerp_max:
        i = np.arange(cfg.lerp_max, cfg.max)
        ramp = cfg.thr + (1.0 - cfg.thr) * (i + 1 - cfg.lerp_max) / (cfg.max - cfg.lerp_max)
        thrs[cfg.lerp_max :] = np.minimum(ramp, 1.0)
        thrs[-1] = 1.0  # the formula can land an ulp off 1.0
    thrs.setflags(write=False)
    return ThresholdFilter(thrs)


def _result(stream: ProbStream, pairs) -> SegmentList:
    return SegmentList([Segment(int(a), int(b)) for a, b in pairs], stream.spec, stream.recording_id)


def pthr(stream: ProbStream, cfg: SegmenterConfig) -> SegmentList:
    """Threshold scan on the stream as given (no smoothing).

    A segment opens at a frame with ``p > thr`` and closes at the first
    later offset ``j`` with ``p[start + j] <= thrs[j]``, or after ``max``
    frames.
    """
    p = stream.probs
    n = p.shape[0]
    thrs = build_threshold_filter(cfg).thrs
    openers = np.flatnonzero(p > cfg.thr)
    out = []
    pos = 0
    while True:
        k = int(np.searchsorted(openers, pos, side="left"))
        if k >= openers.size:
            break
        start = int(openers[k])
        end = min(start + cfg.max, n)
        if end - start > 1:
            hit = p[start + 1 : end] <= thrs[1 : end - start]
            j = int(hit.argmax())
            if hit[j]:
                end = start + 1 + j
        out.append((start, end))
        pos = end
    return _result(stream, out)


def pthr_ma(stream: ProbStream, cfg: SegmenterConfig) -> SegmentList:
    return pthr(moving_average(stream, cfg.n_ma), cfg)


def trim(sgm: Segment, stream: ProbStream, thr: float) -> Segment | None:
    """Shrink ``sgm`` to its first and last frames with ``p > thr``."""
    above = np.flatnonzero(stream.probs[sgm.start : sgm.end] > thr)
    if above.size == 0:
        return None
    return Segment(sgm.start + int(above[0]), sgm.start + int(above[-1]) + 1)


class _Trimmer:
    """O(1) trimming of arbitrary sub-intervals after one linear pass."""

    def __init__(self, p: np.ndarray, thr: float):
        n = p.shape[0]
        idx = np.arange(n)
        above = p > thr
        # first index >= i above thr (n if none); last index <= i above thr (-1 if none)
        nxt = np.where(above, idx, n)
        self.next_above = np.append(np.minimum.accumulate(nxt[::-1])[::-1], n)
        prv = np.where(above, idx, -1)
        self.prev_above = np.maximum.accumulate(prv) if n else prv

    def lengths(self, a, b):
        """Trimmed length of ``[a, b)``, elementwise; 0 for empty results."""
        a = np.asarray(a)
        b = np.asarray(b)
        first = self.next_above[a]
        last = np.where(b > a, self.prev_above[np.maximum(b - 1, 0)], -1)
        return np.where(last >= first, last + 1 - first, 0)

    def bounds(self, a: int, b: int) -> tuple[int, int]:
        return int(self.next_above[a]), int(self.prev_above[b - 1]) + 1


def pdac(stream: ProbStream, cfg: SegmenterConfig) -> SegmentList:
    """Recursive split at the least likely frame until segments are shorter than ``max``.

    Candidates are tried in ascending probability (ties: lower index). The
    split frame is dropped, both halves are trimmed, and the first candidate
    leaving both halves longer than ``min`` wins. If none does, the segment
    is emitted unsplit.
    """
    p = stream.probs
    n = p.shape[0]
    if n == 0:
        return _result(stream, [])
    tr = _Trimmer(p, cfg.thr)
    out = []
    stack = [(0, n)]
    while stack:
        a, b = stack.pop()
        if b - a < cfg.max:
            out.append((a, b))
            continue
        order = np.argsort(p[a:b], kind="stable") + a
        left = tr.lengths(np.full_like(order, a), order)
        right = tr.lengths(order + 1, np.full_like(order, b))
        ok = (left > cfg.min) & (right > cfg.min)
        c = int(ok.argmax())
        if not ok[c]:
            out.append((a, b))
            continue
        k = int(order[c])
        stack.append(tr.bounds(k + 1, b))
        stack.append(tr.bounds(a, k))
    return _result(stream, out)


def _pause_runs(p: np.ndarray, thr: float) -> tuple[np.ndarray, np.ndarray]:
    low = np.concatenate(([False], p <= thr, [False])).astype(np.int8)
    d = np.diff(low)
    return np.flatnonzero(d == 1), np.flatnonzero(d == -1)


def pstrm(stream: ProbStream, cfg: SegmenterConfig) -> SegmentList:
    """Streaming splitter: once a segment holds ``max`` frames, cut it.

    The cut goes at the midpoint of the longest pause (maximal run with
    ``p <= thr``, clipped to the window) whose midpoint falls at least
    ``min`` frames after the segment start; failing that, at ``max``.
    Every emitted piece is trimmed.
    """
    p = stream.probs
    n = p.shape[0]
    run_starts, run_ends = _pause_runs(p, cfg.thr)
    out = []
    start = 0
    while start < n:
        stop = start + cfg.max
        if stop > n:
            cut = n
        else:
            cut = stop
            lo = int(np.searchsorted(run_ends, start, side="right"))
            hi = int(np.searchsorted(run_starts, stop, side="left"))
            if hi > lo:
                rs = np.maximum(run_starts[lo:hi], start)
                re = np.minimum(run_ends[lo:hi], stop)
                mids = rs + (re - rs) // 2
                ok = (mids >= start + cfg.min) & (mids > start)
                if ok.any():
                    lens = np.where(ok, re - rs, -1)
                    cut = int(mids[int(lens.argmax())])
        t = trim(Segment(start, cut), stream, cfg.thr)
        if t is not None:
            out.append((t.start, t.end))
        start = cut
    return _result(stream, out)


_DISPATCH = {"pdac": pdac, "pstrm": pstrm, "pthr": pthr, "pthr_ma": pthr_ma}


def segment(stream: ProbStream, cfg: SegmenterConfig) -> SegmentList:
    return _DISPATCH[cfg.algorithm](stream, cfg)
