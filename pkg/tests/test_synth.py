import numpy as np
import pytest

from probseg import (
    TABLE_V,
    CalibrationError,
    CorpusProfile,
    NoiseProfile,
    corrupt_to_probs,
    frame_prf,
    gen_reference,
    segments_to_labels,
)
from probseg.synth import corpus_frames


@pytest.fixture(scope="module")
def hour():
    profile = CorpusProfile(total_duration=3600, seed=11)
    return gen_reference(profile, recording_id="h"), corpus_frames(profile)


def test_reference_is_deterministic():
    p = CorpusProfile(total_duration=600, seed=5)
    assert gen_reference(p) == gen_reference(p)
    assert gen_reference(p) != gen_reference(CorpusProfile(total_duration=600, seed=6))
    assert gen_reference(p, index=0) != gen_reference(p, index=1)


def test_reference_tiny_duration():
    segs = gen_reference(CorpusProfile(total_duration=0.02, seed=1))
    assert len(segs) <= 1
    for s in segs:
        assert s.end <= 1


def test_reference_mean_length_two_hours():
    segs = gen_reference(CorpusProfile(mean_len=5.79, total_duration=7200, seed=0))
    mean = segs.lengths.mean() / 50
    assert abs(mean - 5.79) <= 0.5
    assert segs.total_frames < 7200 * 50


def test_reference_without_gaps_stays_valid():
    segs = gen_reference(CorpusProfile(mean_gap=0, total_duration=120, seed=2))
    ends = [s.end for s in segs]
    starts = [s.start for s in segs]
    assert all(b > a for a, b in zip(ends, starts[1:]))


def test_profile_validation():
    with pytest.raises(ValueError):
        CorpusProfile(total_duration=0)
    with pytest.raises(ValueError):
        CorpusProfile(mean_len=-1)
    with pytest.raises(ValueError):
        NoiseProfile(target_precision=0)
    with pytest.raises(ValueError):
        NoiseProfile(per_frame_noise_sigma=-1)


def test_noiseless_corruption_is_the_labels(hour):
    ref, n = hour
    s = corrupt_to_probs(ref, NoiseProfile(1.0, 1.0, boundary_jitter=0, per_frame_noise_sigma=0), n)
    labels = segments_to_labels(ref, n)
    np.testing.assert_array_equal(s.probs, labels.labels.astype(np.float32))
    assert frame_prf(s, labels) == frame_prf(s, labels).__class__(1.0, 1.0, 1.0, False)


@pytest.mark.parametrize("name", ["middle", "large"])
def test_operating_points_reached(hour, name):
    ref, n = hour
    s = corrupt_to_probs(ref, NoiseProfile.table_v(name, seed=4), n)
    prf = frame_prf(s, segments_to_labels(ref, n))
    p, r = TABLE_V[name]
    assert abs(prf.precision - p) <= 0.01
    assert abs(prf.recall - r) <= 0.01


def test_corruption_output_contract(hour):
    ref, n = hour
    s = corrupt_to_probs(ref, NoiseProfile.table_v("middle", seed=1), n)
    assert len(s) == n
    assert s.probs.min() >= 0 and s.probs.max() <= 1
    assert s.recording_id == "h"
    again = corrupt_to_probs(ref, NoiseProfile.table_v("middle", seed=1), n)
    assert s == again


def test_unreachable_target_raises(hour):
    ref, n = hour
    # with no gap bleed possible below this precision and no noise, calibration cannot hit it
    with pytest.raises(CalibrationError) as e:
        corrupt_to_probs(ref, NoiseProfile(0.2, 0.9, boundary_jitter=0, per_frame_noise_sigma=0), n)
    assert 0 <= e.value.precision <= 1 and 0 <= e.value.recall <= 1
    assert "achieved" in str(e.value)


def test_table_v_values():
    assert TABLE_V["middle"] == (0.9894, 0.9046)
    assert TABLE_V["large"] == (0.9802, 0.8532)
    assert len(TABLE_V) == 8
