"""Trailing simple moving average over probability streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from probseg.frames import AudioSpec, DEFAULT_SPEC, ProbStream, seconds_to_frames


@dataclass(frozen=True)
class SmoothingConfig:
    n_ma: int = 0

    def __post_init__(self):
        if int(self.n_ma) != self.n_ma or self.n_ma < 0:
            raise ValueError(f"n_ma must be a non-negative integer, got {self.n_ma}")

    @classmethod
    def from_seconds(cls, seconds: float, spec: AudioSpec = DEFAULT_SPEC) -> "SmoothingConfig":
        return cls(seconds_to_frames(seconds, spec))


def sma(probs: np.ndarray, n_ma: int) -> np.ndarray:
    """Mean of the last ``n_ma`` values at each index, truncated at the start.

    Normalizes by the number of values actually in the window, so a
    constant stream stays constant and ``n_ma=1`` is the identity.
    """
    x = np.asarray(probs, dtype=np.float64)
    if n_ma <= 1 or x.size == 0:
        return x.copy()
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - n_ma, 0)
    out = (csum[idx] - csum[lo]) / (idx - lo)
    # prefix-sum cancellation can leave the mean an ulp outside the data range
    return np.clip(out, x.min(), x.max())


def moving_average(stream: ProbStream, cfg: SmoothingConfig | int) -> ProbStream:
    n_ma = cfg.n_ma if isinstance(cfg, SmoothingConfig) else SmoothingConfig(cfg).n_ma
    if n_ma <= 1:
        return stream
    return stream.with_probs(sma(stream.probs, n_ma).astype(np.float32))
