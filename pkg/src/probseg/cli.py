"""Command-line entry point: ``probseg {segment,synth,eval,align,slice,bench}``.

Exit codes: 0 on success, 1 for bad input data, 2 for usage or config errors.
Outputs never depend on ``--jobs``: recordings are processed by a worker
pool but results are collected and written in input order.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from probseg import audio
from probseg.bench import DEFAULT_TOKEN_BUDGET, CostModel, simulate_batches
from probseg.evaluate import (
    frame_prf,
    histogram_csv,
    length_stats,
    overlap_metrics,
    report_csv,
    report_json,
    resegment_align,
)
from probseg.frames import (
    AudioSpec,
    DEFAULT_SPEC,
    ReferenceLabels,
    SegmentList,
    frames_to_seconds,
    read_probs,
    read_segments,
    segments_to_labels,
    write_probs,
    write_segments,
)
from probseg.segmenters import (
    ALGORITHMS,
    DEFAULT_MAX_S,
    DEFAULT_MIN_S,
    DEFAULT_N_MA_S,
    DEFAULT_THR,
    SegmenterConfig,
    segment,
)
from probseg.synth import (
    TABLE_V,
    CalibrationError,
    CorpusProfile,
    NoiseProfile,
    corpus_frames,
    corrupt_to_probs,
    gen_reference,
)

CONFIG_KEYS = ("algorithm", "max", "min", "thr", "n_ma", "lerp_min", "lerp_max")


class DataError(Exception):
    """Bad input data; exit code 1."""


class ConfigError(Exception):
    """Bad flags or config file; exit code 2."""


def _run_pool(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text)
    tmp.replace(path)


# -- config -----------------------------------------------------------------


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: expected one of {', '.join(CONFIG_KEYS)} as key=value")
        out[key] = val.strip()
    return out


def resolve_settings(args: argparse.Namespace) -> tuple[str, dict[str, float]]:
    """Algorithm name and second-valued overrides from the config file and flags."""
    settings = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key)
        if v is not None:
            settings[key] = v
    algorithm = settings.pop("algorithm", "pthr_ma")
    try:
        return algorithm, {k: float(v) for k, v in settings.items()}
    except ValueError as e:
        raise ConfigError(str(e)) from None


def resolve_config(args: argparse.Namespace, spec: AudioSpec = DEFAULT_SPEC) -> SegmenterConfig:
    algorithm, kw = resolve_settings(args)
    try:
        return SegmenterConfig.from_seconds(algorithm, spec=spec, **kw)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def format_config(cfg: SegmenterConfig, spec: AudioSpec = DEFAULT_SPEC) -> str:
    lines = [f"algorithm={cfg.algorithm}"]
    for key in ("max", "min", "n_ma", "lerp_min", "lerp_max"):
        frames = getattr(cfg, key)
        lines.append(f"{key}={frames_to_seconds(frames, spec):g}  # {frames} frames")
    lines.append(f"thr={cfg.thr:g}")
    return "\n".join(lines) + "\n"


# -- segment ----------------------------------------------------------------


def _segment_one(job):
    path, algorithm, settings, out_dir = job
    try:
        stream = read_probs(path)
        cfg = SegmenterConfig.from_seconds(algorithm, spec=stream.spec, **settings)
    except (OSError, ValueError) as e:
        return ("error", f"{path}: {e}")
    rec = stream.recording_id or Path(path).stem
    segs = SegmentList(segment(stream, cfg), stream.spec, rec)
    write_segments(segs, out_dir / f"{rec}.segments.tsv")
    return ("ok", segs)


def cmd_segment(args) -> int:
    cfg = resolve_config(args)
    if args.show_config:
        sys.stdout.write(format_config(cfg))
        return 0
    if not args.probs:
        raise ConfigError("no probability files given")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    algorithm, settings = resolve_settings(args)
    results = _run_pool(_segment_one, [(p, algorithm, settings, out_dir) for p in args.probs], args.jobs)
    errors = [msg for status, msg in results if status == "error"]
    if errors:
        raise DataError("\n".join(errors))
    rows = []
    for _, segs in results:
        src = str(Path(args.audio_dir) / f"{segs.recording_id}.wav") if args.audio_dir else f"{segs.recording_id}.wav"
        rows.extend(audio.Manifest.from_segments(segs, src))
        st = length_stats(segs, args.bin_width)
        print(f"{segs.recording_id}\tsegments={st.count}\tmean={st.mean:.3f}s\tmedian={st.median:.3f}s\tmode_bin={st.mode_bin:g}s")
    audio.write_manifest(audio.Manifest(rows), out_dir / "manifest.tsv")
    return 0


# -- synth ------------------------------------------------------------------


def _synth_one(job):
    k, profile, noise, out_dir = job
    rec = f"rec{k:03d}"
    ref = gen_reference(profile, recording_id=rec, index=k)
    total = corpus_frames(profile)
    try:
        stream = corrupt_to_probs(ref, noise, total, index=k)
    except CalibrationError as e:
        return ("error", f"{rec}: {e}")
    labels = segments_to_labels(ref, total)
    write_probs(stream, out_dir / f"{rec}.probs")
    write_segments(ref, out_dir / f"{rec}.ref.tsv")
    _write_text(out_dir / f"{rec}.labels.txt", "".join(f"{y}\n" for y in labels.labels.tolist()))
    prf = frame_prf(stream, labels)
    return ("ok", (rec, ref, prf))


def cmd_synth(args) -> int:
    if args.operating_point:
        target_p, target_r = TABLE_V[args.operating_point]
    else:
        target_p, target_r = args.precision, args.recall
    try:
        profile = CorpusProfile(args.mean_len, args.len_sigma, args.mean_gap, args.duration, args.seed)
        noise = NoiseProfile(target_p, target_r, args.jitter, args.noise_sigma, args.seed)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if args.recordings < 1:
        raise ConfigError("--recordings must be >= 1")
    if args.show_config:
        print(f"profile={profile}\nnoise={noise}\nrecordings={args.recordings}")
        return 0
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = _run_pool(_synth_one, [(k, profile, noise, out_dir) for k in range(args.recordings)], args.jobs)
    errors = [msg for status, msg in results if status == "error"]
    if errors:
        raise DataError("\n".join(errors))
    rows = []
    for _, (rec, ref, prf) in results:
        rows.extend(audio.Manifest.from_segments(ref, f"{rec}.wav"))
        print(f"{rec}\tsegments={len(ref)}\tprecision={prf.precision:.4f}\trecall={prf.recall:.4f}\tf1={prf.f1:.4f}")
    audio.write_manifest(audio.Manifest(rows), out_dir / "reference_manifest.tsv")
    return 0


# -- eval -------------------------------------------------------------------


def read_labels(path: str, spec: AudioSpec) -> ReferenceLabels:
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line not in ("0", "1"):
            raise DataError(f"{path}:{lineno}: label must be 0 or 1, got {line!r}")
        values.append(int(line))
    return ReferenceLabels(np.array(values, dtype=np.int8), spec)


def _load_segments(path: str) -> SegmentList:
    try:
        return read_segments(path)
    except (OSError, ValueError) as e:
        raise DataError(str(e)) from None


def build_eval_report(hyp: SegmentList, ref: SegmentList, probs_path=None, labels_path=None, bin_width=1.0):
    if hyp.spec != ref.spec:
        raise DataError(f"spec mismatch: hypothesis {hyp.spec} vs reference {ref.spec}")
    ov = overlap_metrics(hyp, ref)
    hs, rs = length_stats(hyp, bin_width), length_stats(ref, bin_width)
    report = {
        "overlap": {
            "iou": ov.iou,
            "over_segmented": ov.over_segmented,
            "under_segmented": ov.under_segmented,
            "hyp_count": ov.hyp_count,
            "ref_count": ov.ref_count,
        },
        "hyp_lengths": {k: v for k, v in hs.to_dict().items() if k != "histogram"},
        "ref_lengths": {k: v for k, v in rs.to_dict().items() if k != "histogram"},
    }
    if probs_path:
        try:
            stream = read_probs(probs_path)
        except (OSError, ProbFormatError) as e:
            raise DataError(str(e)) from None
        if stream.spec != ref.spec:
            raise DataError(f"spec mismatch: probabilities {stream.spec} vs reference {ref.spec}")
        try:
            labels = read_labels(labels_path, stream.spec) if labels_path else segments_to_labels(ref, len(stream))
            prf = frame_prf(stream, labels)
        except (OSError, ValueError, IndexError) as e:
            raise DataError(str(e)) from None
        report["frame"] = {
            "precision": prf.precision,
            "recall": prf.recall,
            "f1": prf.f1,
            "zero_division": prf.zero_division,
        }
    return report, hs, rs


def cmd_eval(args) -> int:
    hyp = _load_segments(args.hyp)
    ref = _load_segments(args.ref)
    report, hs, rs = build_eval_report(hyp, ref, args.probs, args.labels, args.bin_width)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_text(out_dir / "report.json", report_json(report))
    _write_text(out_dir / "report.csv", report_csv(report))
    _write_text(out_dir / "hyp_histogram.csv", histogram_csv(hs))
    _write_text(out_dir / "ref_histogram.csv", histogram_csv(rs))
    ov = report["overlap"]
    print(
        f"iou={ov['iou']:.4f}\tover={ov['over_segmented']}\tunder={ov['under_segmented']}"
        f"\thyp_mean={hs.mean:.3f}s\tref_mean={rs.mean:.3f}s"
    )
    if "frame" in report:
        fr = report["frame"]
        print(f"precision={fr['precision']:.4f}\trecall={fr['recall']:.4f}\tf1={fr['f1']:.4f}")
    return 0


# -- align ------------------------------------------------------------------


def cmd_align(args) -> int:
    try:
        hyp = Path(args.hyp).read_text().split()
        refs = [line.split() for line in Path(args.ref).read_text().splitlines()]
    except OSError as e:
        raise DataError(str(e)) from None
    result = resegment_align(hyp, refs)
    text = "".join(" ".join(seg) + "\n" for seg in result.segments(hyp))
    if args.out:
        _write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    print(f"distance={result.distance}\tsegments={len(refs)}\thyp_tokens={len(hyp)}", file=sys.stderr)
    return 0


# -- slice ------------------------------------------------------------------


def cmd_slice(args) -> int:
    segs = _load_segments(args.segments)
    try:
        samples, spec = audio.read_wav(args.wav, frame_stride=segs.spec.frame_stride)
    except (OSError, audio.UnsupportedAudioError) as e:
        raise DataError(str(e)) from None
    if spec.sample_rate != segs.spec.sample_rate:
        raise DataError(f"{args.wav}: sample rate {spec.sample_rate} does not match segments ({segs.spec.sample_rate})")
    try:
        manifest = audio.slice_wav(samples, spec, segs, args.out_dir)
    except IndexError as e:
        raise DataError(str(e)) from None
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    audio.write_manifest(manifest, Path(args.out_dir) / "manifest.tsv")
    print(f"{segs.recording_id}\twrote {len(manifest)} files to {args.out_dir}")
    return 0


# -- bench ------------------------------------------------------------------


def cmd_bench(args) -> int:
    model = CostModel(args.alpha, args.beta)
    if args.token_budget < 1:
        raise ConfigError("--token-budget must be >= 1")
    if args.show_config:
        print(f"token_budget={args.token_budget}\nalpha={model.alpha:g}\nbeta={model.beta:g}")
        return 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", delimiter="\t")
    w.writerow(["name", "segments", "mean_s", "batches", "waste_ratio", "simulated_cost"])
    for path in args.segments:
        segs = _load_segments(path)
        try:
            plan = simulate_batches(segs, args.token_budget, model)
        except ValueError as e:
            raise DataError(f"{path}: {e}") from None
        mean = frames_to_seconds(segs.total_frames, segs.spec) / len(segs)
        w.writerow([Path(path).name, len(segs), f"{mean:.3f}", len(plan.batches), f"{plan.waste_ratio:.4f}", f"{plan.simulated_cost:.1f}"])
    if args.out:
        _write_text(Path(args.out), buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="probseg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, jobs=True):
        sp.add_argument("--show-config", action="store_true", help="print the resolved settings and exit")
        if jobs:
            sp.add_argument("--jobs", type=int, default=1, help="worker processes across recordings")

    s = sub.add_parser("segment", help="segment probability files")
    s.add_argument("probs", nargs="*", help="probability files (.txt or binary with .json header)")
    s.add_argument("--config", help="key=value config file; flags override it")
    s.add_argument("--algorithm", choices=ALGORITHMS)
    s.add_argument("--max", type=float, help=f"seconds (default {DEFAULT_MAX_S:g})")
    s.add_argument("--min", type=float, help=f"seconds (default {DEFAULT_MIN_S:g})")
    s.add_argument("--thr", type=float, help=f"default {DEFAULT_THR['pthr']:g} for pthr/pthr_ma, {DEFAULT_THR['pdac']:g} otherwise")
    s.add_argument("--n-ma", dest="n_ma", type=float, help=f"moving average seconds (default {DEFAULT_N_MA_S['pthr_ma']:g} for pthr_ma)")
    s.add_argument("--lerp-min", dest="lerp_min", type=float, help="seconds; default min + 10%% of (max - min)")
    s.add_argument("--lerp-max", dest="lerp_max", type=float, help="seconds; default max - 20%% of (max - min)")
    s.add_argument("--out-dir", default="segments")
    s.add_argument("--audio-dir", help="directory used for manifest source paths")
    s.add_argument("--bin-width", type=float, default=1.0)
    common(s)
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("synth", help="generate a synthetic corpus with calibrated probabilities")
    s.add_argument("--out-dir", default="synth")
    s.add_argument("--duration", type=float, default=7200.0, help="seconds per recording")
    s.add_argument("--recordings", type=int, default=1)
    s.add_argument("--mean-len", type=float, default=5.79)
    s.add_argument("--len-sigma", type=float, default=0.6)
    s.add_argument("--mean-gap", type=float, default=0.8)
    s.add_argument("--operating-point", choices=sorted(TABLE_V), help="take precision/recall from a classifier row")
    s.add_argument("--precision", type=float, default=1.0)
    s.add_argument("--recall", type=float, default=1.0)
    s.add_argument("--jitter", type=float, default=0.02, help="boundary jitter, seconds")
    s.add_argument("--noise-sigma", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    common(s)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("eval", help="compare a hypothesis segmentation with a reference")
    s.add_argument("--hyp", required=True)
    s.add_argument("--ref", required=True)
    s.add_argument("--probs", help="probability file for frame precision/recall")
    s.add_argument("--labels", help="0/1 label file; derived from --ref when omitted")
    s.add_argument("--out-dir", default="eval")
    s.add_argument("--bin-width", type=float, default=1.0)
    common(s, jobs=False)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("align", help="mWER resegmentation of a hypothesis token file")
    s.add_argument("--hyp", required=True, help="whitespace-separated hypothesis tokens")
    s.add_argument("--ref", required=True, help="one reference segment per line")
    s.add_argument("--out", help="write aligned segments here instead of stdout")
    s.set_defaults(func=cmd_align, show_config=False)

    s = sub.add_parser("slice", help="cut a WAV file into per-segment files")
    s.add_argument("--wav", required=True)
    s.add_argument("--segments", required=True)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_slice, show_config=False)

    s = sub.add_parser("bench", help="simulate length-sorted batching and decode cost")
    s.add_argument("segments", nargs="*")
    s.add_argument("--token-budget", type=int, default=DEFAULT_TOKEN_BUDGET, help="padded frames per batch")
    s.add_argument("--alpha", type=float, default=CostModel.alpha)
    s.add_argument("--beta", type=float, default=CostModel.beta)
    s.add_argument("--out", help="also write the table here")
    common(s, jobs=False)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except ConfigError as e:
        parser.print_usage(sys.stderr)
        print(f"probseg: error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"probseg: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
