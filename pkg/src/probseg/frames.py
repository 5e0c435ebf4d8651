"""Frame geometry, the probability-stream data model and its file formats.

All module boundaries in the package exchange frame indices. Seconds only
appear at the edges (CLI flags, manifests, reports) and always pass through
:func:`seconds_to_frames` / :func:`frames_to_seconds`.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

PROBS_FORMAT = "probseg-f32le"
PROBS_VERSION = 1
SEGMENTS_HEADER = "start\tend"


class ProbFormatError(ValueError):
    """Raised for malformed probability files or out-of-range values."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index


@dataclass(frozen=True)
class AudioSpec:
    """Sampling geometry of a stream: 16 kHz audio, one frame per 320 samples."""

    sample_rate: int = 16000
    frame_stride: int = 320
    window_seconds: float = 20.0

    def __post_init__(self):
        if self.sample_rate <= 0 or self.frame_stride <= 0 or self.window_seconds <= 0:
            raise ValueError(f"AudioSpec fields must be positive: {self}")

    @property
    def frames_per_second(self) -> float:
        return self.sample_rate / self.frame_stride

    @property
    def window_frames(self) -> int:
        return seconds_to_frames(self.window_seconds, self)

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "frame_stride": self.frame_stride,
            "window_seconds": self.window_seconds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AudioSpec":
        return cls(
            sample_rate=int(d["sample_rate"]),
            frame_stride=int(d["frame_stride"]),
            window_seconds=float(d["window_seconds"]),
        )


DEFAULT_SPEC = AudioSpec()


def seconds_to_frames(t: float, spec: AudioSpec = DEFAULT_SPEC) -> int:
    """Convert seconds to a frame count, rounding half up.

    The product is evaluated on the decimal value of ``t`` so that e.g.
    ``0.1`` s at 50 fps is exactly 5 frames rather than a float near it.
    """
    if isinstance(t, float) and not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    exact = Fraction(str(t)) * spec.sample_rate / spec.frame_stride
    return math.floor(exact + Fraction(1, 2))


def frames_to_seconds(n: int, spec: AudioSpec = DEFAULT_SPEC) -> float:
    return n * spec.frame_stride / spec.sample_rate


@dataclass(frozen=True, order=True)
class Segment:
    """Half-open frame interval ``[start, end)``."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid segment [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def __iter__(self) -> Iterator[int]:
        yield self.start
        yield self.end


@dataclass(frozen=True)
class SegmentList:
    """Sorted, non-overlapping segments of one recording."""

    segments: tuple[Segment, ...]
    spec: AudioSpec = DEFAULT_SPEC
    recording_id: str = ""

    def __init__(self, segments: Iterable = (), spec: AudioSpec = DEFAULT_SPEC, recording_id: str = ""):
        segs = tuple(s if isinstance(s, Segment) else Segment(int(s[0]), int(s[1])) for s in segments)
        for a, b in zip(segs, segs[1:]):
            if a.end > b.start:
                raise ValueError(f"segments overlap or are unsorted: {tuple(a)} then {tuple(b)}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "recording_id", recording_id)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def __getitem__(self, k):
        return self.segments[k]

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.segments], dtype=np.int64)

    @property
    def total_frames(self) -> int:
        return int(sum(len(s) for s in self.segments))

    def as_tuples(self) -> list[tuple[int, int]]:
        return [(s.start, s.end) for s in self.segments]


def _as_prob_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float32).reshape(-1)
    bad = ~((arr >= 0.0) & (arr <= 1.0))  # NaN fails both comparisons
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ProbFormatError(f"probability {arr[i]!r} outside [0, 1]", index=i)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProbStream:
    """Per-frame segment probabilities, stored as read-only float32."""

    probs: np.ndarray
    spec: AudioSpec = DEFAULT_SPEC
    recording_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_prob_array(self.probs))

    def __len__(self) -> int:
        return int(self.probs.shape[0])

    def __eq__(self, other):
        if not isinstance(other, ProbStream):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.recording_id == other.recording_id
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    def with_probs(self, probs) -> "ProbStream":
        return ProbStream(probs, self.spec, self.recording_id)


@dataclass(frozen=True)
class ReferenceLabels:
    labels: np.ndarray
    spec: AudioSpec = DEFAULT_SPEC

    def __post_init__(self):
        arr = np.array(self.labels, dtype=np.int8).reshape(-1)
        src = np.asarray(self.labels).reshape(-1)
        if arr.size and not np.all((src == 0) | (src == 1)):
            i = int(np.flatnonzero(~((src == 0) | (src == 1)))[0])
            raise ValueError(f"label at index {i} is not 0 or 1: {src[i]!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __eq__(self, other):
        if not isinstance(other, ReferenceLabels):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.labels, other.labels)

    __hash__ = None


def segments_to_labels(segs: SegmentList, total_frames: int) -> ReferenceLabels:
    labels = np.zeros(total_frames, dtype=np.int8)
    for s in segs:
        if s.end > total_frames:
            raise IndexError(f"segment {tuple(s)} exceeds total_frames={total_frames}")
        labels[s.start:s.end] = 1
    return ReferenceLabels(labels, segs.spec)


def labels_to_segments(labels, spec: AudioSpec | None = None, recording_id: str = "") -> SegmentList:
    """Maximal runs of 1 as a SegmentList."""
    if isinstance(labels, ReferenceLabels):
        spec = spec or labels.spec
        labels = labels.labels
    y = np.asarray(labels).astype(np.int8).reshape(-1)
    edges = np.diff(np.concatenate(([0], y, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return SegmentList(zip(starts.tolist(), ends.tolist()), spec or DEFAULT_SPEC, recording_id)


def concat_windows(window_probs: Sequence[ProbStream]) -> ProbStream:
    """Join non-overlapping inference windows into one stream.

    Every window except the last must hold exactly ``window_seconds`` worth
    of frames; a short trailing window is accepted.
    """
    if not window_probs:
        raise ValueError("no windows to concatenate")
    first = window_probs[0]
    n = first.spec.window_frames
    for k, w in enumerate(window_probs):
        if w.spec != first.spec:
            raise ValueError(f"window {k} has spec {w.spec}, expected {first.spec}")
        if k < len(window_probs) - 1 and len(w) != n:
            raise ValueError(f"interior window {k} has {len(w)} frames, expected {n}")
    if len(window_probs) == 1:
        return first
    probs = np.concatenate([w.probs for w in window_probs])
    return ProbStream(probs, first.spec, first.recording_id)


# -- serialization ----------------------------------------------------------


def header_path(path: str | os.PathLike) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _is_text(path: Path) -> bool:
    return path.suffix.lower() == ".txt"


def write_probs(stream: ProbStream, path: str | os.PathLike) -> None:
    """Write a stream.

    ``*.txt`` paths get one value per line with ``# key=value`` header lines;
    anything else gets raw little-endian float32 plus a JSON sidecar at
    ``<path>.json``.
    """
    path = Path(path)
    meta = {"recording_id": stream.recording_id, **stream.spec.to_dict()}
    if _is_text(path):
        lines = [f"# {k}={v}" for k, v in meta.items()]
        # float64 repr of each float32 value: exact on re-read, no double rounding
        lines += [repr(v) for v in stream.probs.astype(np.float64).tolist()]
        _atomic_write(path, ("\n".join(lines) + "\n").encode())
        return
    header = {"format": PROBS_FORMAT, "version": PROBS_VERSION, "num_frames": len(stream), **meta}
    _atomic_write(path, stream.probs.astype("<f4").tobytes())
    _atomic_write(header_path(path), (json.dumps(header, sort_keys=True, indent=1) + "\n").encode())


def _spec_from_meta(meta: dict, where: str) -> AudioSpec:
    try:
        return AudioSpec.from_dict({**DEFAULT_SPEC.to_dict(), **meta})
    except (KeyError, TypeError, ValueError) as e:
        raise ProbFormatError(f"{where}: bad spec in header: {e}") from None


def _read_text_probs(path: Path) -> ProbStream:
    meta: dict = {}
    values: list[float] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition("=")
            if not sep:
                raise ProbFormatError(f"{path}:{lineno}: header line must be '# key=value'")
            meta[key.strip()] = val.strip()
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ProbFormatError(f"{path}:{lineno}: not a number: {line!r}", index=len(values)) from None
    rec = meta.pop("recording_id", path.stem)
    return ProbStream(_checked(values, path), _spec_from_meta(meta, str(path)), rec)


def _checked(values, path: Path) -> np.ndarray:
    try:
        return _as_prob_array(values)
    except ProbFormatError as e:
        raise ProbFormatError(f"{path}: probability outside [0, 1]", index=e.index) from None


def read_probs(path: str | os.PathLike) -> ProbStream:
    path = Path(path)
    if _is_text(path):
        return _read_text_probs(path)
    hdr = header_path(path)
    try:
        meta = json.loads(hdr.read_text())
    except FileNotFoundError:
        raise ProbFormatError(f"missing header sidecar {hdr}") from None
    except json.JSONDecodeError as e:
        raise ProbFormatError(f"{hdr}: malformed header: {e}") from None
    if not isinstance(meta, dict) or meta.get("format") != PROBS_FORMAT:
        raise ProbFormatError(f"{hdr}: not a {PROBS_FORMAT} header")
    payload = path.read_bytes()
    if len(payload) % 4:
        raise ProbFormatError(f"{path}: payload of {len(payload)} bytes is not a whole number of float32")
    values = np.frombuffer(payload, dtype="<f4")
    if "num_frames" in meta and int(meta["num_frames"]) != values.size:
        raise ProbFormatError(f"{path}: header says {meta['num_frames']} frames, payload has {values.size}")
    meta = {k: v for k, v in meta.items() if k in ("sample_rate", "frame_stride", "window_seconds")} | {
        "recording_id": meta.get("recording_id", path.stem)
    }
    rec = str(meta.pop("recording_id"))
    return ProbStream(_checked(values, path), _spec_from_meta(meta, str(hdr)), rec)


def write_segments(segs: SegmentList, path: str | os.PathLike) -> None:
    """Segments as TSV of frame indices with a ``#`` metadata preamble."""
    lines = [f"# recording_id={segs.recording_id}"]
    lines += [f"# {k}={v}" for k, v in segs.spec.to_dict().items()]
    lines.append(SEGMENTS_HEADER)
    lines += [f"{s.start}\t{s.end}" for s in segs]
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode())


def read_segments(path: str | os.PathLike) -> SegmentList:
    path = Path(path)
    meta: dict = {}
    rows: list[tuple[int, int]] = []
    seen_header = False
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
            continue
        if not seen_header:
            if line.split() != SEGMENTS_HEADER.split():
                raise ValueError(f"{path}:{lineno}: expected header {SEGMENTS_HEADER!r}")
            seen_header = True
            continue
        parts = line.split("\t")
        try:
            rows.append((int(parts[0]), int(parts[1])))
            if len(parts) != 2:
                raise ValueError
            Segment(*rows[-1])
        except (ValueError, IndexError):
            raise ValueError(f"{path}:{lineno}: malformed segment row {raw!r}") from None
    rec = meta.pop("recording_id", path.stem)
    spec = AudioSpec.from_dict({**DEFAULT_SPEC.to_dict(), **meta})
    try:
        return SegmentList(rows, spec, rec)
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from None
