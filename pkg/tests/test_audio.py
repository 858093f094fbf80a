import numpy as np
import pytest

from moodloop import audio
from moodloop.errors import (
    DimensionMismatchError,
    InputTooShortError,
    InsufficientDataError,
)

SR = audio.SAMPLE_RATE


def sine(freq, seconds=2.0, amp=1.0):
    t = np.arange(int(seconds * SR)) / SR
    return amp * np.sin(2 * np.pi * freq * t)


@pytest.fixture(scope="module")
def sine440():
    return audio.extract_frame_features(sine(440.0, seconds=5.0))


@pytest.fixture(scope="module")
def slices():
    return audio.feature_slices()


class TestFrameFeatures:
    def test_frame_dim_ledger(self, sine440):
        assert sine440.values.shape[1] == 555
        assert audio.FRAME_DIM == 555

    def test_frame_count(self):
        n = SR  # 1 s
        m = audio.extract_frame_features(np.zeros(n))
        expected = 1 + (n - audio.FRAME_LENGTH) // audio.HOP_LENGTH
        assert m.values.shape[0] == expected

    def test_too_short_audio(self):
        with pytest.raises(InputTooShortError):
            audio.extract_frame_features(np.zeros(audio.FRAME_LENGTH - 1))

    def test_wrong_sample_rate(self):
        with pytest.raises(DimensionMismatchError):
            audio.extract_frame_features(np.zeros(10000), sample_rate=22050)

    def test_zcr_of_440hz_sine(self, sine440, slices):
        # A sine at f crosses zero 2f times per second.
        zcr = sine440.values[:, slices["zcr"]].ravel()
        assert np.allclose(zcr, 880.0 / SR, rtol=0.03)

    def test_chroma_peaks_at_pitch_class_a(self, sine440, slices):
        chroma = sine440.values[:, slices["chroma"]]
        assert np.all(chroma.argmax(axis=1) == 9)  # A with C = 0
        assert np.allclose(chroma.max(axis=1), 1.0)

    def test_silence_rms_zero_flatness_one(self, slices):
        m = audio.extract_frame_features(np.zeros(SR))
        assert np.all(m.values[:, slices["rms"]] == 0.0)
        assert np.allclose(m.values[:, slices["flatness"]], 1.0, atol=1e-6)

    def test_rolloff_monotone_per_frame(self, slices):
        rng = np.random.default_rng(0)
        m = audio.extract_frame_features(rng.standard_normal(3 * SR))
        roll = m.values[:, slices["rolloff"]]
        assert np.all(np.diff(roll, axis=1) >= 0)

    def test_centroid_near_tone_frequency(self, slices):
        m = audio.extract_frame_features(sine(2000.0))
        centroid = m.values[:, slices["centroid"]].ravel()
        assert np.allclose(centroid, 2000.0, rtol=0.1)

    def test_zcr_and_chroma_gain_invariant_rms_linear(self, slices):
        x = sine(440.0, seconds=1.0)
        a = audio.extract_frame_features(x).values
        b = audio.extract_frame_features(3.0 * x).values
        assert np.allclose(a[:, slices["zcr"]], b[:, slices["zcr"]])
        assert np.array_equal(
            a[:, slices["chroma"]].argmax(axis=1),
            b[:, slices["chroma"]].argmax(axis=1),
        )
        assert np.allclose(3.0 * a[:, slices["rms"]], b[:, slices["rms"]])

    def test_deterministic_for_identical_audio(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(SR)
        a = audio.extract_frame_features(x.copy()).values
        b = audio.extract_frame_features(x.copy()).values
        assert np.array_equal(a, b)

    def test_all_values_finite_on_noise_and_silence(self):
        rng = np.random.default_rng(2)
        for x in (rng.standard_normal(SR), np.zeros(SR)):
            assert np.all(np.isfinite(audio.extract_frame_features(x).values))

    def test_tempogram_lag_zero_normalized(self, slices):
        rng = np.random.default_rng(3)
        m = audio.extract_frame_features(rng.standard_normal(2 * SR))
        tempo = m.values[:, slices["tempogram"]]
        assert np.allclose(tempo[:, 0], 1.0)
        assert np.all(np.abs(tempo) <= 1.0 + 1e-9)


class TestAggregation:
    def test_single_frame_mean_equals_value_std_zero(self):
        m = audio.extract_frame_features(np.zeros(audio.FRAME_LENGTH))
        assert m.values.shape[0] == 1
        vec = audio.aggregate_features(m)
        assert np.array_equal(vec[:555], m.values[0])
        assert np.all(vec[555:1110] == 0.0)
        assert np.array_equal(vec[1110:], m.values[0])

    def test_constant_dim_has_zero_std(self, sine440):
        vec = audio.aggregate_features(sine440)
        zcr_std = vec[555]  # std block starts at 555; zcr is dim 0
        assert zcr_std < 1e-3

    def test_output_length_1665(self, sine440):
        vec = audio.aggregate_features(sine440)
        assert vec.shape[0] == 1665 == audio.MUSIC_FEATURE_DIM

    def test_std_block_nonnegative(self):
        rng = np.random.default_rng(4)
        vec = audio.extract_music_features(rng.standard_normal(SR))
        assert np.all(vec[555:1110] >= 0.0)


class TestReduction:
    def test_constant_dim_dropped(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((10, 4))
        m[:, 2] = 7.5
        report = audio.reduce_features(m)
        assert report.dropped_constant == [2]
        assert report.partition_ok(4)

    def test_duplicate_dim_later_index_dropped(self):
        rng = np.random.default_rng(6)
        m = rng.standard_normal((12, 3))
        m[:, 2] = 2.0 * m[:, 0] + 1.0  # exact affine copy, |r| = 1
        report = audio.reduce_features(m)
        assert 0 in report.kept_indices
        assert report.dropped_correlated == [2]

    def test_quasi_constant_dropped(self):
        rng = np.random.default_rng(7)
        m = rng.standard_normal((20, 2))
        col = np.full(20, 3.14)
        col[:2] = [1.0, 2.0]  # mode covers 18/20 = 90%
        m[:, 1] = col
        report = audio.reduce_features(m)
        assert report.dropped_quasi_constant == [1]

    def test_quasi_constant_buckets_to_six_significant_digits(self):
        rng = np.random.default_rng(8)
        m = rng.standard_normal((20, 2))
        # Values differ only past the 6th significant digit: one bucket.
        m[:, 1] = 1.0 + 1e-9 * rng.standard_normal(20)
        report = audio.reduce_features(m)
        assert report.dropped_quasi_constant == [1]

    def test_kept_dims_pairwise_below_threshold(self):
        rng = np.random.default_rng(9)
        base = rng.standard_normal((30, 6))
        noisy = base + 0.05 * rng.standard_normal((30, 6))
        m = np.hstack([base, noisy])
        report = audio.reduce_features(m)
        kept = m[:, report.kept_indices]
        corr = np.corrcoef(kept, rowvar=False)
        off = corr[~np.eye(len(report.kept_indices), dtype=bool)]
        assert np.all(np.abs(off) <= 0.92 + 1e-12)

    def test_insufficient_vectors(self):
        with pytest.raises(InsufficientDataError):
            audio.reduce_features(np.ones((1, 5)))

    def test_deterministic(self):
        rng = np.random.default_rng(10)
        m = rng.standard_normal((15, 20))
        a = audio.reduce_features(m)
        b = audio.reduce_features(m.copy())
        assert a.kept_indices == b.kept_indices


class TestNormalization:
    def test_minmax_identity_on_unit_range(self):
        m = np.array([[0.0, 0.0], [1.0, 1.0], [0.5, 0.25]])
        out, _ = audio.fit_normalization(m, kind="minmax")
        assert np.allclose(out, m)

    def test_minmax_two_values(self):
        m = np.array([[2.0], [4.0]])
        out, _ = audio.fit_normalization(m, kind="minmax")
        assert np.allclose(out.ravel(), [0.0, 1.0])

    def test_unseen_value_clamped(self):
        m = np.array([[0.0], [1.0]])
        _, stats = audio.fit_normalization(m, kind="minmax")
        assert stats.transform(np.array([100.0]))[0] == 3.0
        assert stats.transform(np.array([-100.0]))[0] == -3.0

    def test_zero_variance_dim_passes_through_as_zero(self):
        m = np.array([[5.0, 1.0], [5.0, 2.0]])
        out, stats = audio.fit_normalization(m, kind="minmax")
        assert np.all(out[:, 0] == 0.0)
        assert stats.transform(np.array([9.0, 1.5]))[0] == 0.0

    def test_zscore_stats(self):
        rng = np.random.default_rng(11)
        m = rng.standard_normal((50, 3)) * 4 + 2
        out, _ = audio.fit_normalization(m, kind="zscore")
        assert np.allclose(out.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(out.std(axis=0), 1.0, atol=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            audio.fit_normalization(np.ones((3, 2)), kind="robust")
