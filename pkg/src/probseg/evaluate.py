"""Frame metrics, segment length statistics, overlap counts and mWER resegmentation."""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from probseg.frames import ProbStream, ReferenceLabels, SegmentList, frames_to_seconds


@dataclass(frozen=True)
class FramePRF:
    precision: float
    recall: float
    f1: float
    zero_division: bool = False


def frame_prf(stream: ProbStream, ref: ReferenceLabels, threshold: float = 0.5) -> FramePRF:
    """Precision/recall/F1 of ``p > threshold`` against the gold labels.

    Undefined ratios are reported as 0 with ``zero_division`` set.
    """
    if len(stream) != len(ref):
        raise ValueError(f"length mismatch: {len(stream)} probabilities vs {len(ref)} labels")
    pred = stream.probs > threshold
    gold = ref.labels.astype(bool)
    tp = int(np.count_nonzero(pred & gold))
    npred = int(np.count_nonzero(pred))
    ngold = int(np.count_nonzero(gold))
    zero = npred == 0 or ngold == 0
    p = tp / npred if npred else 0.0
    r = tp / ngold if ngold else 0.0
    f1 = 2 * p * r / (p + r) if p > 0 and r > 0 else 0.0
    return FramePRF(p, r, f1, zero)


@dataclass(frozen=True)
class LengthStats:
    count: int
    total_frames: int
    mean: float
    median: float
    mode_bin: float
    bin_width: float
    histogram: tuple[tuple[float, int], ...] = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = [list(b) for b in self.histogram]
        return d


def length_stats(segs: SegmentList, bin_width: float = 1.0) -> LengthStats:
    """Segment length statistics in seconds, with bins ``[k*w, (k+1)*w)``.

    The histogram runs from 0 to the last occupied bin; ``mode_bin`` is the
    start of the fullest bin (lowest on ties).
    """
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    lengths = segs.lengths
    if lengths.size == 0:
        return LengthStats(0, 0, 0.0, 0.0, 0.0, bin_width, ())
    secs = [frames_to_seconds(int(n), segs.spec) for n in lengths]
    total = int(lengths.sum())
    bins = np.floor(np.asarray(secs) / bin_width + 1e-9).astype(np.int64)
    counts = np.bincount(bins)
    hist = tuple((float(k * bin_width), int(c)) for k, c in enumerate(counts))
    return LengthStats(
        count=int(lengths.size),
        total_frames=total,
        mean=frames_to_seconds(total, segs.spec) / lengths.size,
        median=float(statistics.median(secs)),
        mode_bin=float(int(counts.argmax()) * bin_width),
        bin_width=bin_width,
        histogram=hist,
    )


def histogram_csv(stats: LengthStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_start", "count"])
    for start, count in stats.histogram:
        w.writerow([f"{start:g}", count])
    return buf.getvalue()


@dataclass(frozen=True)
class OverlapReport:
    iou: float
    over_segmented: int
    under_segmented: int
    hyp_count: int
    ref_count: int


def _overlap_counts(a: SegmentList, b: SegmentList) -> np.ndarray:
    """For each segment of ``a``, how many segments of ``b`` it intersects."""
    if not len(a) or not len(b):
        return np.zeros(len(a), dtype=np.int64)
    b_starts = np.array([s.start for s in b])
    b_ends = np.array([s.end for s in b])
    a_starts = np.array([s.start for s in a])
    a_ends = np.array([s.end for s in a])
    first = np.searchsorted(b_ends, a_starts, side="right")
    last = np.searchsorted(b_starts, a_ends, side="left")
    return np.maximum(last - first, 0)


def overlap_metrics(hyp: SegmentList, ref: SegmentList) -> OverlapReport:
    """Frame-coverage IoU plus over-/under-segmentation counts.

    A reference segment intersected by two or more hypothesis segments is
    over-segmented; a hypothesis segment covering two or more references
    counts as under-segmentation.
    """
    if hyp.spec != ref.spec:
        raise ValueError(f"spec mismatch: {hyp.spec} vs {ref.spec}")
    n = max([s.end for s in hyp] + [s.end for s in ref] + [0])
    h = np.zeros(n, dtype=bool)
    r = np.zeros(n, dtype=bool)
    for s in hyp:
        h[s.start:s.end] = True
    for s in ref:
        r[s.start:s.end] = True
    union = int(np.count_nonzero(h | r))
    iou = int(np.count_nonzero(h & r)) / union if union else 1.0
    over = int(np.count_nonzero(_overlap_counts(ref, hyp) >= 2))
    under = int(np.count_nonzero(_overlap_counts(hyp, ref) >= 2))
    return OverlapReport(iou, over, under, len(hyp), len(ref))


# -- mWER resegmentation ----------------------------------------------------


@dataclass(frozen=True)
class AlignmentResult:
    spans: tuple[tuple[int, int], ...]
    distance: int
    segment_distances: tuple[int, ...]

    def segments(self, hyp_tokens: Sequence[str]) -> list[list[str]]:
        return [list(hyp_tokens[a:b]) for a, b in self.spans]


def _edit_row(ref: Sequence[str], hyp: Sequence[str]) -> np.ndarray:
    """``row[j]`` = word edit distance between ``ref`` and ``hyp[:j]``."""
    m = len(hyp)
    row = np.arange(m + 1, dtype=np.int64)
    if not ref:
        return row
    codes = {}
    h = np.array([codes.setdefault(t, len(codes)) for t in hyp], dtype=np.int64)
    offs = np.arange(m + 1, dtype=np.int64)
    for i, tok in enumerate(ref, 1):
        c = codes.get(tok, -1)
        new = np.empty_like(row)
        new[0] = i
        new[1:] = np.minimum(row[1:] + 1, row[:-1] + (h != c))
        # insertions run along the row: new[j] = min_k new[k] + (j - k)
        row = np.minimum.accumulate(new - offs) + offs
    return row


def _suffix_rows(refs: Sequence[Sequence[str]], hyp: Sequence[str]) -> list[np.ndarray]:
    """``out[k][j]`` = edit distance between refs[k:] joined and ``hyp[j:]``."""
    rev_hyp = list(reversed(hyp))
    n = len(hyp)
    out = [None] * (len(refs) + 1)
    out[len(refs)] = np.arange(n, -1, -1, dtype=np.int64)
    # walk the reversed concatenation once, snapshotting at segment boundaries
    row = np.arange(n + 1, dtype=np.int64)
    codes = {}
    h = np.array([codes.setdefault(t, len(codes)) for t in rev_hyp], dtype=np.int64)
    offs = np.arange(n + 1, dtype=np.int64)
    depth = 0
    for k in range(len(refs) - 1, -1, -1):
        for tok in reversed(refs[k]):
            depth += 1
            c = codes.get(tok, -1)
            new = np.empty_like(row)
            new[0] = depth
            new[1:] = np.minimum(row[1:] + 1, row[:-1] + (h != c))
            row = np.minimum.accumulate(new - offs) + offs
        # row[t] covers the last t hyp tokens, i.e. hyp[n - t:]
        out[k] = row[::-1].copy()
    return out


def resegment_align(hyp_tokens: Sequence[str], ref_segments: Sequence[Sequence[str]]) -> AlignmentResult:
    """Split the hypothesis into one span per reference minimizing total edit distance.

    Among optimal splits the one with the earliest boundaries (compared
    left to right) is returned. Runs in O(len(hyp) * total reference tokens).
    """
    hyp = list(hyp_tokens)
    refs = [list(r) for r in ref_segments]
    n = len(hyp)
    if not refs:
        return AlignmentResult((), n, ())
    suffix = _suffix_rows(refs, hyp)
    best = int(suffix[0][0])
    spans, dists = [], []
    prev, spent = 0, 0
    for k, ref in enumerate(refs):
        if k == len(refs) - 1:
            cost = int(_edit_row(ref, hyp[prev:])[-1])
            spans.append((prev, n))
            dists.append(cost)
            break
        local = _edit_row(ref, hyp[prev:])
        total = spent + local + suffix[k + 1][prev:]
        j = int(np.flatnonzero(total == best)[0])
        spans.append((prev, prev + j))
        dists.append(int(local[j]))
        spent += int(local[j])
        prev += j
    return AlignmentResult(tuple(spans), int(sum(dists)), tuple(dists))


# -- report serialization -----------------------------------------------------


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_csv(report: dict) -> str:
    """Flatten scalar entries as ``key,value`` rows in sorted key order."""
    rows = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif not isinstance(v, (list, tuple)):
            rows.append((prefix, v))

    walk("", report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerows(rows)
    return buf.getvalue()
