import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from probseg import (
    AudioSpec,
    ProbFormatError,
    ProbStream,
    Segment,
    SegmentList,
    concat_windows,
    labels_to_segments,
    read_probs,
    seconds_to_frames,
    segments_to_labels,
    write_probs,
)
from probseg.frames import header_path, read_segments, write_segments


@pytest.mark.parametrize("t, frames", [(20, 1000), (0, 0), (0.2, 10), (0.1, 5), (28, 1400), (0.01, 1), (0.03, 2)])
def test_seconds_to_frames(t, frames):
    assert seconds_to_frames(t, AudioSpec()) == frames


def test_seconds_to_frames_rounds_half_up():
    # 0.01 s = 0.5 frame, 0.05 s = 2.5 frames
    assert seconds_to_frames(0.01) == 1
    assert seconds_to_frames(0.05) == 3
    assert seconds_to_frames(0.009) == 0


def test_seconds_to_frames_rejects_negative():
    with pytest.raises(ValueError):
        seconds_to_frames(-0.1)


@given(st.floats(0, 1e5), st.floats(0, 1e5))
def test_seconds_to_frames_monotone(a, b):
    lo, hi = sorted((a, b))
    assert seconds_to_frames(lo) <= seconds_to_frames(hi)


def test_nonstandard_spec_goes_through_conversion():
    spec = AudioSpec(sample_rate=8000, frame_stride=240)  # 33.33 fps
    assert seconds_to_frames(3, spec) == 100
    assert seconds_to_frames(0.015, spec) == 1  # 0.5 frame rounds up


def test_audio_spec_validation():
    assert AudioSpec().frames_per_second == 50
    assert AudioSpec().window_frames == 1000
    with pytest.raises(ValueError):
        AudioSpec(sample_rate=0)


def test_segment_invariants():
    assert len(Segment(2, 5)) == 3
    for bad in [(3, 3), (-1, 2), (5, 2)]:
        with pytest.raises(ValueError):
            Segment(*bad)


def test_segment_list_rejects_overlap():
    SegmentList([(0, 2), (2, 4)])
    with pytest.raises(ValueError):
        SegmentList([(0, 3), (2, 4)])
    with pytest.raises(ValueError):
        SegmentList([(5, 6), (0, 1)])


@pytest.mark.parametrize(
    "segs, total, labels",
    [
        ([(2, 4)], 5, [0, 0, 1, 1, 0]),
        ([], 3, [0, 0, 0]),
        ([(0, 2), (3, 4)], 4, [1, 1, 0, 1]),
    ],
)
def test_segments_to_labels(segs, total, labels):
    assert segments_to_labels(SegmentList(segs), total).labels.tolist() == labels


def test_segments_to_labels_out_of_range():
    with pytest.raises(IndexError):
        segments_to_labels(SegmentList([(0, 6)]), 5)


@st.composite
def separated_segments(draw):
    gaps = draw(st.lists(st.integers(1, 20), max_size=15))
    lens = draw(st.lists(st.integers(1, 20), min_size=len(gaps), max_size=len(gaps)))
    first_gap = draw(st.integers(0, 5))
    segs, t = [], first_gap
    for g, n in zip(gaps, lens):
        segs.append((t, t + n))
        t += n + g
    return SegmentList(segs), t


@given(separated_segments())
def test_labels_round_trip_to_segments(case):
    segs, total = case
    assert labels_to_segments(segments_to_labels(segs, total)) == segs


def test_prob_stream_validates_range():
    with pytest.raises(ProbFormatError) as e:
        ProbStream([0.1, 1.5, 0.2])
    assert e.value.index == 1
    with pytest.raises(ProbFormatError) as e:
        ProbStream([0.1, 0.2, float("nan")])
    assert e.value.index == 2


@given(st.lists(st.floats(0, 1, width=32), max_size=200), st.text(alphabet="abcxyz_-0123", max_size=8))
def test_binary_round_trip_is_bit_exact(tmp_path_factory, values, rec):
    path = tmp_path_factory.mktemp("p") / "x.probs"
    s = ProbStream(values, AudioSpec(), rec)
    write_probs(s, path)
    back = read_probs(path)
    assert back == s
    assert back.probs.tobytes() == s.probs.tobytes()


@given(st.lists(st.floats(0, 1, width=32), max_size=100))
def test_text_round_trip_is_bit_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("p") / "x.txt"
    s = ProbStream(values, AudioSpec(sample_rate=8000, frame_stride=160, window_seconds=10), "r1")
    write_probs(s, path)
    assert read_probs(path) == s


def test_text_format_hand_written(tmp_path):
    path = tmp_path / "hand.txt"
    path.write_text("# recording_id=talk\n0.1\n0.9\n\n0.5\n")
    s = read_probs(path)
    assert s.recording_id == "talk"
    assert s.spec == AudioSpec()
    np.testing.assert_array_equal(s.probs, np.float32([0.1, 0.9, 0.5]))


def test_text_value_out_of_range_names_index(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0.1\n0.2\n1.5\n")
    with pytest.raises(ProbFormatError) as e:
        read_probs(path)
    assert e.value.index == 2
    assert "index 2" in str(e.value)


def test_binary_nan_names_index(tmp_path):
    path = tmp_path / "bad.probs"
    write_probs(ProbStream([0.0, 0.0, 0.0]), path)
    path.write_bytes(np.float32([0.2, np.nan, 0.3]).tobytes())
    with pytest.raises(ProbFormatError) as e:
        read_probs(path)
    assert e.value.index == 1


def test_empty_payload(tmp_path):
    path = tmp_path / "empty.probs"
    write_probs(ProbStream([], AudioSpec(), "e"), path)
    assert path.read_bytes() == b""
    s = read_probs(path)
    assert len(s) == 0 and s.recording_id == "e"


@pytest.mark.parametrize(
    "header",
    [
        "not json",
        json.dumps({"format": "other"}),
        json.dumps({"format": "probseg-f32le", "sample_rate": "x"}),
        json.dumps({"format": "probseg-f32le", "num_frames": 5}),
    ],
)
def test_malformed_header(tmp_path, header):
    path = tmp_path / "x.probs"
    write_probs(ProbStream([0.5, 0.5]), path)
    header_path(path).write_text(header)
    with pytest.raises(ProbFormatError):
        read_probs(path)


def test_missing_header(tmp_path):
    path = tmp_path / "x.probs"
    path.write_bytes(np.float32([0.5]).tobytes())
    with pytest.raises(ProbFormatError):
        read_probs(path)


def test_concat_windows(make_stream):
    a = make_stream(np.full(1000, 0.1))
    b = make_stream(np.full(1000, 0.5))
    c = make_stream(np.full(137, 0.9))
    assert concat_windows([a]) == a
    assert len(concat_windows([a, b])) == 2000
    out = concat_windows([a, b, c])
    assert len(out) == 2137
    np.testing.assert_array_equal(out.probs, np.concatenate([a.probs, b.probs, c.probs]))


def test_concat_windows_errors(make_stream):
    a = make_stream(np.full(1000, 0.1))
    short = make_stream(np.full(999, 0.1))
    with pytest.raises(ValueError):
        concat_windows([short, a])
    other = ProbStream(np.full(1000, 0.1), AudioSpec(window_seconds=10))
    with pytest.raises(ValueError):
        concat_windows([a, other])
    with pytest.raises(ValueError):
        concat_windows([])


def test_segments_file_round_trip(tmp_path):
    segs = SegmentList([(1, 5), (7, 9)], AudioSpec(window_seconds=30), "talk")
    write_segments(segs, tmp_path / "s.tsv")
    assert read_segments(tmp_path / "s.tsv") == segs


def test_segments_file_malformed(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("start\tend\n1\t5\n9\t3\n")
    with pytest.raises(ValueError, match=":3:"):
        read_segments(p)
