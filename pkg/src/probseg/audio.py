"""PCM16 mono WAV I/O, segment slicing and the TSV segment manifest."""

from __future__ import annotations

import os
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from probseg.frames import AudioSpec, DEFAULT_SPEC, SegmentList, frames_to_seconds

MANIFEST_HEADER = ("id", "path", "start", "duration")
HEADER_LINE = "\t".join(MANIFEST_HEADER)


class UnsupportedAudioError(ValueError):
    pass


class ManifestError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def read_wav(path: str | os.PathLike, frame_stride: int = DEFAULT_SPEC.frame_stride) -> tuple[np.ndarray, AudioSpec]:
    """Read a 16-bit PCM mono WAV as int16 samples plus its spec."""
    try:
        with wave.open(str(path), "rb") as w:
            if w.getnchannels() != 1:
                raise UnsupportedAudioError(f"{path}: {w.getnchannels()} channels, only mono is supported")
            if w.getsampwidth() != 2:
                raise UnsupportedAudioError(f"{path}: {8 * w.getsampwidth()}-bit samples, only 16-bit PCM is supported")
            n = w.getnframes()
            rate = w.getframerate()
            raw = w.readframes(n)
    except wave.Error as e:
        raise UnsupportedAudioError(f"{path}: {e}") from None
    except EOFError:
        raise UnsupportedAudioError(f"{path}: truncated file") from None
    if len(raw) != 2 * n:
        raise UnsupportedAudioError(f"{path}: truncated file, header says {n} samples, found {len(raw) // 2}")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.int16)
    return samples, AudioSpec(sample_rate=rate, frame_stride=frame_stride)


def write_wav(path: str | os.PathLike, samples: np.ndarray, sample_rate: int = DEFAULT_SPEC.sample_rate) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with wave.open(str(tmp), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(np.asarray(samples, dtype="<i2").tobytes())
    os.replace(tmp, path)


@dataclass(frozen=True)
class ManifestRow:
    recording_id: str
    path: str
    start: float
    duration: float

    def __post_init__(self):
        # the file format carries milliseconds
        object.__setattr__(self, "start", round(float(self.start), 3))
        object.__setattr__(self, "duration", round(float(self.duration), 3))
        if self.start < 0:
            raise ValueError(f"negative start {self.start}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True)
class Manifest:
    rows: tuple[ManifestRow, ...]

    def __init__(self, rows: Iterable[ManifestRow] = ()):
        rows = tuple(rows)
        last: dict[str, float] = {}
        for k, row in enumerate(rows):
            if row.start < last.get(row.recording_id, 0.0):
                raise ValueError(f"row {k}: {row.recording_id} starts at {row.start}, before its previous row")
            last[row.recording_id] = row.start
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @classmethod
    def from_segments(cls, segs: SegmentList, source_path: str) -> "Manifest":
        return cls(
            ManifestRow(
                segs.recording_id,
                source_path,
                frames_to_seconds(s.start, segs.spec),
                frames_to_seconds(len(s), segs.spec),
            )
            for s in segs
        )


def format_manifest(manifest: Manifest) -> str:
    lines = ["\t".join(MANIFEST_HEADER)]
    lines += [f"{r.recording_id}\t{r.path}\t{r.start:.3f}\t{r.duration:.3f}" for r in manifest]
    return "\n".join(lines) + "\n"


def write_manifest(manifest: Manifest, path: str | os.PathLike) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(format_manifest(manifest))
    os.replace(tmp, path)


def parse_manifest(text: str) -> Manifest:
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != MANIFEST_HEADER:
        raise ManifestError(f"expected header {HEADER_LINE!r}", 1)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ManifestError(f"expected 4 tab-separated fields, got {len(parts)}", lineno)
        try:
            rows.append(ManifestRow(parts[0], parts[1], float(parts[2]), float(parts[3])))
        except ValueError as e:
            raise ManifestError(str(e), lineno) from None
    try:
        return Manifest(rows)
    except ValueError as e:
        raise ManifestError(str(e)) from None


def read_manifest(path: str | os.PathLike) -> Manifest:
    return parse_manifest(Path(path).read_text())


def slice_wav(
    samples: np.ndarray,
    spec: AudioSpec,
    segs: SegmentList,
    out_dir: str | os.PathLike,
) -> Manifest:
    """Write ``<recording_id>_<index>.wav`` per segment; frame ``i`` starts at sample ``i * frame_stride``."""
    out_dir = Path(out_dir)
    stride = spec.frame_stride
    for s in segs:
        if s.end * stride > len(samples):
            raise IndexError(f"segment {tuple(s)} ends at sample {s.end * stride}, audio has {len(samples)}")
    if not len(segs):
        return Manifest()
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, s in enumerate(segs):
        path = out_dir / f"{segs.recording_id}_{k}.wav"
        write_wav(path, samples[s.start * stride : s.end * stride], spec.sample_rate)
        rows.append(ManifestRow(segs.recording_id, str(path), frames_to_seconds(s.start, spec), frames_to_seconds(len(s), spec)))
    return Manifest(rows)
