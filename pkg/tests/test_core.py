import numpy as np
import pytest

from moodloop.core import (
    GENRES,
    Quadrant,
    SongRecord,
    TrialRecord,
    VAScore,
    axis_labels,
    quadrant_of,
    rescale_annotation,
)
from moodloop.errors import InvalidAnnotationError, InvalidScoreError


class TestVAScore:
    def test_valid_range(self):
        s = VAScore(-5.0, 5.0)
        assert s.valence == -5.0 and s.arousal == 5.0

    @pytest.mark.parametrize("v,a", [(5.1, 0.0), (0.0, -5.1), (float("nan"), 0.0), (float("inf"), 0.0)])
    def test_rejects_out_of_range_or_nonfinite(self, v, a):
        with pytest.raises(InvalidScoreError):
            VAScore(v, a)

    def test_immutable(self):
        s = VAScore(1.0, 1.0)
        with pytest.raises(AttributeError):
            s.valence = 2.0


class TestQuadrantOf:
    def test_both_positive(self):
        assert quadrant_of(VAScore(2.0, 3.0)) is Quadrant.Q1

    def test_slightly_negative_pair(self):
        assert quadrant_of(VAScore(-0.1, -0.1)) is Quadrant.Q3

    def test_zero_valence_counts_as_negative(self):
        assert quadrant_of(VAScore(0.0, 1.0)) is Quadrant.Q2

    def test_zero_arousal_counts_as_negative(self):
        assert quadrant_of(VAScore(1.0, 0.0)) is Quadrant.Q4

    def test_origin(self):
        assert quadrant_of(VAScore(0.0, 0.0)) is Quadrant.Q3

    def test_partitions_the_plane(self):
        rng = np.random.default_rng(0)
        for v, a in rng.uniform(-5, 5, size=(200, 2)):
            q = quadrant_of(VAScore(v, a))
            assert q in tuple(Quadrant)
            sv, sa = q.signs
            assert (v > 0) == (sv > 0)
            assert (a > 0) == (sa > 0)

    def test_signs_round_trip(self):
        for q in Quadrant:
            sv, sa = q.signs
            assert Quadrant.from_signs(sv > 0, sa > 0) is q


class TestRescaleAnnotation:
    @pytest.mark.parametrize("raw,expected", [(5, 0), (9, 4), (1, -4)])
    def test_worked_values(self, raw, expected):
        assert rescale_annotation(raw) == expected

    @pytest.mark.parametrize("raw", [0.5, 9.5, float("nan")])
    def test_out_of_range(self, raw):
        with pytest.raises(InvalidAnnotationError):
            rescale_annotation(raw)

    def test_round_trip(self):
        for raw in range(1, 10):
            assert rescale_annotation(raw) + 5 == raw

    def test_quadrant_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(1)
        for raw_v, raw_a in rng.uniform(1, 9, size=(100, 2)):
            v, a = rescale_annotation(raw_v), rescale_annotation(raw_a)
            base = Quadrant.from_signs(v > 0, a > 0)
            for k in (0.1, 2.5):
                assert Quadrant.from_signs(k * v > 0, k * a > 0) is base


class TestSongRecord:
    def _song(self, **kw):
        defaults = dict(
            song_id="s0001",
            audio_path="audio/s0001.wav",
            genre="Rock",
            valence_raw=7.0,
            arousal_raw=3.0,
        )
        defaults.update(kw)
        return SongRecord(**defaults)

    def test_rescaled_annotation(self):
        assert self._song().rescaled_annotation == (2.0, -2.0)

    def test_annotation_quadrant(self):
        assert self._song().annotation_quadrant is Quadrant.Q4

    def test_eight_genres(self):
        assert len(GENRES) == 8
        for g in GENRES:
            self._song(genre=g)

    def test_unknown_genre(self):
        with pytest.raises(InvalidAnnotationError):
            self._song(genre="Techno")

    def test_out_of_range_annotation(self):
        with pytest.raises(InvalidAnnotationError):
            self._song(valence_raw=10.0)

    def test_nonfinite_features_rejected(self):
        with pytest.raises(InvalidScoreError):
            self._song(feature_vector=np.array([1.0, np.nan]))

    def test_with_features(self):
        s = self._song().with_features(np.arange(4.0))
        assert np.array_equal(s.feature_vector, [0, 1, 2, 3])
        assert s.song_id == "s0001"


class TestTrialRecord:
    def _trial(self, **kw):
        defaults = dict(
            trial_id="t1",
            user_id="u1",
            timestamp=0.0,
            eeg_features=np.zeros(40),
            song_id="s0001",
            evaluated_score=VAScore(1.0, -1.0),
            phase="training",
        )
        defaults.update(kw)
        return TrialRecord(**defaults)

    def test_evaluated_quadrant_derived_from_score(self):
        assert self._trial().evaluated_quadrant is Quadrant.Q4

    def test_matched_requires_designation(self):
        assert self._trial().matched is None
        t = self._trial(designated_quadrant=Quadrant.Q4, phase="testing")
        assert t.matched is True
        t = self._trial(designated_quadrant=Quadrant.Q1, phase="testing")
        assert t.matched is False

    def test_unknown_phase(self):
        with pytest.raises(InvalidScoreError):
            self._trial(phase="warmup")

    def test_nonfinite_eeg_rejected(self):
        with pytest.raises(InvalidScoreError):
            self._trial(eeg_features=np.array([np.inf] * 40))


def test_axis_labels_zero_rule():
    scores = [VAScore(1.0, 0.0), VAScore(0.0, 2.0), VAScore(-1.0, -1.0)]
    v, a = axis_labels(scores)
    assert np.array_equal(v, [1, -1, -1])
    assert np.array_equal(a, [-1, 1, -1])
