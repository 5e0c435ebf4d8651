"""Speech segmentation from per-frame segment probabilities.

The package turns the output of a segmentation frame classifier (one
probability per 20 ms frame that the frame lies inside a sentence-like
segment) into a list of segments. Four decoders are provided:

- ``pdac``: recursive divide-and-conquer split at the least likely frame
- ``pstrm``: streaming splitter cutting at the longest pause
- ``pthr``: online threshold scan with a position-dependent closing filter
- ``pthr_ma``: ``pthr`` on a trailing moving average of the stream

Example:
    >>> from probseg import AudioSpec, ProbStream, SegmenterConfig, segment
    >>> stream = ProbStream([0.2, 0.8, 0.8, 0.1], AudioSpec(), "rec")
    >>> cfg = SegmenterConfig(max=8, min=0, thr=0.5, lerp_min=0, lerp_max=8, algorithm="pthr")
    >>> [tuple(s) for s in segment(stream, cfg)]
    [(1, 3)]
"""

from probseg.frames import (
    AudioSpec,
    ProbFormatError,
    ProbStream,
    ReferenceLabels,
    Segment,
    SegmentList,
    concat_windows,
    frames_to_seconds,
    labels_to_segments,
    read_probs,
    seconds_to_frames,
    segments_to_labels,
    write_probs,
)
from probseg.smoothing import SmoothingConfig, moving_average
from probseg.segmenters import (
    ALGORITHMS,
    SegmenterConfig,
    ThresholdFilter,
    build_threshold_filter,
    pdac,
    pstrm,
    pthr,
    pthr_ma,
    segment,
    trim,
)
from probseg.synth import (
    TABLE_V,
    CalibrationError,
    CorpusProfile,
    NoiseProfile,
    corrupt_to_probs,
    gen_reference,
)
from probseg.evaluate import (
    AlignmentResult,
    FramePRF,
    LengthStats,
    OverlapReport,
    frame_prf,
    length_stats,
    overlap_metrics,
    resegment_align,
)
from probseg.bench import BatchPlan, CostModel, simulate_batches

__all__ = [
    "ALGORITHMS",
    "AlignmentResult",
    "AudioSpec",
    "BatchPlan",
    "CalibrationError",
    "CorpusProfile",
    "CostModel",
    "FramePRF",
    "LengthStats",
    "NoiseProfile",
    "OverlapReport",
    "ProbFormatError",
    "ProbStream",
    "ReferenceLabels",
    "Segment",
    "SegmentList",
    "SegmenterConfig",
    "SmoothingConfig",
    "TABLE_V",
    "ThresholdFilter",
    "build_threshold_filter",
    "concat_windows",
    "corrupt_to_probs",
    "frame_prf",
    "frames_to_seconds",
    "gen_reference",
    "labels_to_segments",
    "length_stats",
    "moving_average",
    "overlap_metrics",
    "pdac",
    "pstrm",
    "pthr",
    "pthr_ma",
    "read_probs",
    "resegment_align",
    "seconds_to_frames",
    "segment",
    "segments_to_labels",
    "simulate_batches",
    "trim",
    "write_probs",
]

__version__ = "0.1.0"
