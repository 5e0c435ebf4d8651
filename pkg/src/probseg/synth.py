"""Synthetic reference corpora and classifier-like probability streams.

A reference segmentation is drawn with log-normal segment lengths and
exponential gaps. It is then corrupted into a probability stream whose
frame-level precision and recall (at 0.5) hit requested targets, e.g. the
operating points of real segmentation frame classifiers.

Corruption model, in logit space, per frame ``i``:

- boundaries of the reference are jittered by Gaussian offsets;
- frames inside a (jittered) segment get logit ``+MARGIN + sigma * e_i``
  minus a recall bias ``r * (BOUNDARY_DIP * exp(-d_i / TAU_IN))`` that
  erodes segment edges, and minus ``DROPOUT_DEPTH`` on isolated dropout
  frames (``u_i < r * DROPOUT_RATE``);
- gap frames get ``-MARGIN + sigma * e_i`` plus a precision bias
  ``f * BOUNDARY_BLEED * exp(-d_i / TAU_OUT)`` that bleeds speech into the
  pauses;
- a logistic squashes the result to ``[0, 1]``.

``d_i`` is the distance in frames to the nearest jittered boundary. ``r``
and ``f`` are found by bisection with the random draws held fixed, so both
measured rates are monotone in their knob.

Random numbers come from numpy's PCG64 seeded with ``SeedSequence([seed,
index, purpose])``: recording ``index`` of a corpus draws its reference with
``purpose = 0`` and its corruption with ``purpose = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from probseg.frames import (
    AudioSpec,
    DEFAULT_SPEC,
    ProbStream,
    Segment,
    SegmentList,
    seconds_to_frames,
    segments_to_labels,
)

# (precision, recall) of each classifier on the dev set
TABLE_V: dict[str, tuple[float, float]] = {
    "middle": (0.9894, 0.9046),
    "middle+quarter": (0.9879, 0.9194),
    "middle+half": (0.9861, 0.9282),
    "middle+all": (0.9834, 0.9344),
    "large": (0.9802, 0.8532),
    "large+quarter": (0.9908, 0.9074),
    "large+half": (0.9896, 0.9166),
    "large+all": (0.9812, 0.9381),
}

MARGIN = 4.0
BOUNDARY_DIP = 12.0
TAU_IN = 25.0
DROPOUT_RATE = 0.1
DROPOUT_DEPTH = 8.0
BOUNDARY_BLEED = 8.0
TAU_OUT = 10.0

CALIBRATION_TOL = 0.002
MAX_BISECTIONS = 60


class CalibrationError(RuntimeError):
    def __init__(self, message: str, precision: float, recall: float):
        super().__init__(f"{message} (achieved precision={precision:.4f}, recall={recall:.4f})")
        self.precision = precision
        self.recall = recall


@dataclass(frozen=True)
class CorpusProfile:
    mean_len: float = 5.79
    len_sigma: float = 0.6
    mean_gap: float = 0.8
    total_duration: float = 7200.0
    seed: int = 0

    def __post_init__(self):
        if not self.mean_len > 0:
            raise ValueError(f"mean_len must be > 0, got {self.mean_len}")
        if not self.mean_gap >= 0:
            raise ValueError(f"mean_gap must be >= 0, got {self.mean_gap}")
        if not self.total_duration > 0:
            raise ValueError(f"total_duration must be > 0, got {self.total_duration}")
        if not self.len_sigma >= 0:
            raise ValueError(f"len_sigma must be >= 0, got {self.len_sigma}")


@dataclass(frozen=True)
class NoiseProfile:
    target_precision: float = 1.0
    target_recall: float = 1.0
    boundary_jitter: float = 0.02
    per_frame_noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("target_precision", "target_recall"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.per_frame_noise_sigma < 0 or self.boundary_jitter < 0:
            raise ValueError("noise sigma and boundary jitter must be >= 0")

    @classmethod
    def table_v(cls, name: str, **kw) -> "NoiseProfile":
        p, r = TABLE_V[name]
        return cls(target_precision=p, target_recall=r, **kw)


REFERENCE_STREAM = 0
NOISE_STREAM = 1


def rng_for(seed: int, index: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index), int(purpose)])))


def gen_reference(
    profile: CorpusProfile,
    spec: AudioSpec = DEFAULT_SPEC,
    recording_id: str = "",
    index: int = 0,
) -> SegmentList:
    """Alternate exponential gaps and log-normal segments until the duration runs out.

    The log-normal location is ``ln(mean_len) - sigma**2 / 2`` so the mean
    length is ``mean_len``. Gaps are at least one frame so neighbouring
    segments stay distinguishable in the frame labels.
    """
    rng = rng_for(profile.seed, index, REFERENCE_STREAM)
    total = seconds_to_frames(profile.total_duration, spec)
    mu = math.log(profile.mean_len) - profile.len_sigma**2 / 2
    fps = spec.frames_per_second
    segs = []
    t = 0
    while True:
        gap = rng.exponential(profile.mean_gap) if profile.mean_gap > 0 else 0.0
        length = rng.lognormal(mu, profile.len_sigma)
        t += max(1, int(gap * fps + 0.5))
        if t >= total:
            break
        end = min(t + max(1, int(length * fps + 0.5)), total)
        segs.append(Segment(t, end))
        t = end
    return SegmentList(segs, spec, recording_id)


def _jitter(ref: SegmentList, sigma_frames: float, total: int, rng: np.random.Generator) -> np.ndarray:
    """0/1 signal of the reference with every boundary moved by a Gaussian offset."""
    x = np.zeros(total, dtype=np.int8)
    offsets = rng.normal(0.0, sigma_frames, size=(len(ref), 2)) if sigma_frames > 0 else np.zeros((len(ref), 2))
    prev_end = 0
    for (s, e), (ds, de) in zip(ref.as_tuples(), offsets):
        s2 = min(max(s + int(round(ds)), prev_end), total - 1)
        e2 = min(max(e + int(round(de)), s2 + 1), total)
        x[s2:e2] = 1
        prev_end = e2
    return x


def _boundary_distance(x: np.ndarray) -> np.ndarray:
    """Frames to the nearest change of ``x``; stream edges do not count."""
    n = x.size
    if n == 0:
        return np.zeros(0)
    idx = np.arange(n)
    change = np.flatnonzero(np.diff(x) != 0) + 1  # first index of each new run
    if change.size == 0:
        return np.full(n, np.inf)
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [n]))
    run = np.searchsorted(change, idx, side="right")
    left = (idx - starts[run]).astype(np.float64)
    right = (ends[run] - 1 - idx).astype(np.float64)
    left[run == 0] = np.inf
    right[run == starts.size - 1] = np.inf
    return np.minimum(left, right)


class _Corruptor:
    """Holds the fixed random draws; maps knob values to probabilities."""

    def __init__(self, ref: SegmentList, noise: NoiseProfile, total: int, index: int):
        rng = rng_for(noise.seed, index, NOISE_STREAM)
        fps = ref.spec.frames_per_second
        self.x = _jitter(ref, noise.boundary_jitter * fps, total, rng)
        self.inside = self.x.astype(bool)
        self.truth = segments_to_labels(ref, total).labels.astype(bool)
        d = _boundary_distance(self.x)
        self.dip = BOUNDARY_DIP * np.exp(-d / TAU_IN)
        self.bleed = BOUNDARY_BLEED * np.exp(-d / TAU_OUT)
        self.eps = noise.per_frame_noise_sigma * rng.standard_normal(total)
        self.u = rng.random(total)
        self.sigma = noise.per_frame_noise_sigma

    def probs(self, r: float, f: float) -> np.ndarray:
        if r == 0 and f == 0 and self.sigma == 0:
            return self.x.astype(np.float32)
        z = np.where(
            self.inside,
            MARGIN + self.eps - r * self.dip - DROPOUT_DEPTH * (self.u < r * DROPOUT_RATE),
            -MARGIN + self.eps + f * self.bleed,
        )
        # float32 is what gets stored and measured downstream
        return (1.0 / (1.0 + np.exp(-z))).astype(np.float32)

    def rates(self, r: float, f: float) -> tuple[float, float]:
        pred = self.probs(r, f) > 0.5
        tp = np.count_nonzero(pred & self.truth)
        npred = np.count_nonzero(pred)
        npos = np.count_nonzero(self.truth)
        return (tp / npred if npred else 0.0), (tp / npos if npos else 0.0)


def _bisect(fn, target: float, hi: float, decreasing: bool) -> float:
    """Smallest knob in [0, hi] whose rate is within tolerance of ``target``."""
    lo_v = fn(0.0)
    if abs(lo_v - target) <= CALIBRATION_TOL or (lo_v < target if decreasing else lo_v > target):
        return 0.0
    while (fn(hi) > target) if decreasing else (fn(hi) < target):
        hi *= 2
        if hi > 1e3:
            return hi
    lo = 0.0
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        v = fn(mid)
        if abs(v - target) <= CALIBRATION_TOL:
            return mid
        if (v > target) == decreasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def corrupt_to_probs(
    ref: SegmentList,
    noise: NoiseProfile,
    total_frames: int,
    index: int = 0,
    tolerance: float = 0.01,
    rounds: int = 6,
) -> ProbStream:
    """Probability stream whose frame precision/recall at 0.5 match the targets.

    Raises :class:`CalibrationError` if either rate ends up more than
    ``tolerance`` away from its target.
    """
    c = _Corruptor(ref, noise, total_frames, index)
    r = f = 0.0
    for _ in range(rounds):
        r = _bisect(lambda v: c.rates(v, f)[1], noise.target_recall, 1.0, decreasing=True)
        f = _bisect(lambda v: c.rates(r, v)[0], noise.target_precision, 1.0, decreasing=True)
        prec, rec = c.rates(r, f)
        if abs(prec - noise.target_precision) <= CALIBRATION_TOL and abs(rec - noise.target_recall) <= CALIBRATION_TOL:
            break
    prec, rec = c.rates(r, f)
    if abs(prec - noise.target_precision) > tolerance or abs(rec - noise.target_recall) > tolerance:
        raise CalibrationError(
            f"could not reach precision={noise.target_precision}, recall={noise.target_recall}", prec, rec
        )
    return ProbStream(c.probs(r, f), ref.spec, ref.recording_id)


def corpus_frames(profile: CorpusProfile, spec: AudioSpec = DEFAULT_SPEC) -> int:
    return seconds_to_frames(profile.total_duration, spec)
