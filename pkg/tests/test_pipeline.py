import numpy as np
import pytest

from moodloop import simulate
from moodloop.core import Quadrant, TrialRecord, VAScore
from moodloop.errors import DegenerateLabelsError, InsufficientDataError
from moodloop.pipeline import TrainConfig, concat_features, train_user_model


class TestConcatFeatures:
    def test_order_eeg_then_music(self):
        e, m = np.array([1.0, 2.0]), np.array([3.0, 4.0, 5.0])
        out = concat_features(e, m)
        assert np.array_equal(out, [1, 2, 3, 4, 5])
        assert np.array_equal(out[: len(e)], e)

    def test_empty_music_block(self):
        e = np.array([1.0, 2.0])
        assert np.array_equal(concat_features(e, np.array([])), e)


class TestTrainedModel:
    def test_cv_reports_one_accuracy_per_fold(self, small_setup):
        model = small_setup.model
        k = small_setup.config.train.cv_folds
        for axis in ("valence", "arousal"):
            assert model.axis(axis).cv.fold_accuracies.shape == (k,)

    def test_final_selection_within_target(self, small_setup):
        model = small_setup.model
        target = small_setup.config.train.final_target
        for axis in ("valence", "arousal"):
            selected = model.axis(axis).final_sbs.selected_indices
            assert len(selected) <= target
            assert model.axis(axis).model.weights.shape[0] == len(selected)

    def test_selection_profile_partitions(self, small_setup):
        model = small_setup.model
        for axis in ("valence", "arousal"):
            n_eeg, n_music = model.selection_profile(axis)
            assert n_eeg + n_music == len(
                model.axis(axis).final_sbs.selected_indices
            )
            assert n_eeg >= 0 and n_music >= 0

    def test_predict_quadrant_returns_quadrant(self, small_setup):
        model = small_setup.model
        rng = np.random.default_rng(0)
        feats = rng.standard_normal(model.eeg_dim)
        q = model.predict_quadrant(feats, small_setup.library[0].feature_vector)
        assert q in tuple(Quadrant)

    def test_combined_vector_matches_weights_length(self, small_setup):
        model = small_setup.model
        x = model.combined_vector(
            np.zeros(model.eeg_dim),
            small_setup.library[0].feature_vector,
            "valence",
        )
        assert x.shape[0] == model.valence.model.weights.shape[0]

    def test_axis_names_validated(self, small_setup):
        with pytest.raises(KeyError):
            small_setup.model.axis("tempo")

    def test_training_cv_accuracy_beats_chance(self, small_setup):
        # The responder is a noiseless linear function of the features,
        # so the learned linear models should fit far above chance.
        for axis in ("valence", "arousal"):
            assert small_setup.model.axis(axis).cv.mean > 0.7


class TestTrainUserModel:
    def test_too_few_trials(self, small_setup):
        with pytest.raises(InsufficientDataError):
            train_user_model(
                "u", small_setup.trials[:3], small_setup.songs,
                TrainConfig(cv_folds=7),
            )

    def test_missing_song_record(self, small_setup):
        trials = small_setup.trials
        with pytest.raises(InsufficientDataError, match="song"):
            train_user_model("u", trials, {}, small_setup.config.train)

    def test_single_class_labels_rejected(self, small_setup):
        forced = [
            TrialRecord(
                trial_id=t.trial_id,
                user_id=t.user_id,
                timestamp=t.timestamp,
                eeg_features=t.eeg_features,
                song_id=t.song_id,
                evaluated_score=VAScore(2.0, 2.0),
                phase=t.phase,
            )
            for t in small_setup.trials
        ]
        with pytest.raises(DegenerateLabelsError):
            train_user_model("u", forced, small_setup.songs, small_setup.config.train)


class TestSyntheticLibrary:
    def test_even_quadrant_coverage(self):
        rng = np.random.default_rng(1)
        songs, active = simulate.make_synthetic_library(rng, n_songs=40)
        per_q = {q: 0 for q in Quadrant}
        for s in songs:
            per_q[s.annotation_quadrant] += 1
        assert set(per_q.values()) == {10}
        assert all(s.feature_vector.shape == (1665,) for s in songs)

    def test_inactive_dims_constant(self):
        rng = np.random.default_rng(2)
        songs, active = simulate.make_synthetic_library(rng, n_songs=20, n_active_dims=6)
        matrix = np.stack([s.feature_vector for s in songs])
        inactive = np.setdiff1d(np.arange(1665), active)
        assert np.all(matrix[:, inactive] == matrix[0, inactive])
        assert np.all(matrix[:, active].std(axis=0) > 0)


class TestResponders:
    def test_linear_responder_is_deterministic(self, small_setup):
        feats = np.zeros(40)
        song = small_setup.library[0]
        a = small_setup.responder(feats, song)
        b = small_setup.responder(feats, song)
        assert a == b

    def test_linear_responder_produces_both_classes(self, small_setup):
        quadrants = {
            small_setup.responder(np.zeros(40), s).quadrant
            for s in small_setup.library
        }
        assert len(quadrants) >= 2

    def test_random_responder_uniform(self):
        responder = simulate.RandomResponder(np.random.default_rng(3))
        counts = {q: 0 for q in Quadrant}
        for _ in range(2000):
            counts[responder(None, None).quadrant] += 1
        for c in counts.values():
            assert abs(c / 2000 - 0.25) < 0.05


class TestTrainingSchedule:
    def test_trial_count_and_even_designation(self, small_setup):
        cfg = small_setup.config
        expected = (
            cfg.training_days
            * cfg.experiments_per_day
            * cfg.trials_per_quadrant
            * 4
        )
        assert len(small_setup.trials) == expected

    def test_repeat_fraction_in_band(self):
        library, responder, rng = simulate.make_closed_loop_scenario(seed=3, n_songs=200)
        cfg = simulate.SimulationConfig()
        trials = simulate.run_training_phase(library, responder, cfg, rng)
        from collections import Counter

        counts = Counter(t.song_id for t in trials)
        repeated = {s: c for s, c in counts.items() if c >= 2}
        # Band is over distinct songs: the share that reappear.
        fraction = len(repeated) / len(counts)
        assert 0.25 <= fraction <= 0.35
        assert all(2 <= c <= 5 for c in repeated.values())


class TestReportCSV:
    def test_shape_and_determinism(self):
        reports = [
            simulate.DayReport(
                day=d, match_rate=0.5, new_song_ratio=0.25,
                t_valence=0.1, t_arousal=0.2,
            )
            for d in range(1, 6)
        ]
        text = simulate.report_csv(reports)
        lines = text.strip().split("\n")
        assert lines[0] == "day,match_rate,new_song_ratio,t_arousal,t_valence"
        assert len(lines) == 6
        assert text == simulate.report_csv(reports)
