"""Desk-scale closed-loop simulation: synthetic EEG, synthetic song
library, deterministic responders, and the multi-day protocols.

The synthetic library stores feature vectors in the full 1665-dim music
layout with only a small set of active dims varying, so the reduction
stage collapses the space exactly as it would on real audio.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import eeg as eeg_mod
from . import engine
from .audio import MUSIC_FEATURE_DIM
from .core import Quadrant, SongRecord, TrialRecord, VAScore
from .pipeline import TrainConfig, TrainedModel, train_user_model

QUADRANTS = (Quadrant.Q1, Quadrant.Q2, Quadrant.Q3, Quadrant.Q4)

# Raw-annotation sampling boxes per quadrant: (v_lo, v_hi, a_lo, a_hi).
_ANNOTATION_BOXES = {
    Quadrant.Q1: (5.5, 9.0, 5.5, 9.0),
    Quadrant.Q2: (1.0, 4.5, 5.5, 9.0),
    Quadrant.Q3: (1.0, 4.5, 1.0, 4.5),
    Quadrant.Q4: (5.5, 9.0, 1.0, 4.5),
}


def make_eeg_recording(
    rng: np.random.Generator,
    seconds: float = 4.0,
    channels: Sequence[str] = eeg_mod.EMOTIV_CHANNELS,
) -> eeg_mod.EEGRecording:
    """Stationary broadband noise with mild per-channel gain differences."""
    n = int(seconds * eeg_mod.SAMPLE_RATE)
    gains = 1.0 + 0.2 * rng.standard_normal(len(channels))
    data = gains[:, None] * rng.standard_normal((len(channels), n))
    return eeg_mod.EEGRecording(channels=tuple(channels), data=data)


def trial_eeg_features(
    rng: np.random.Generator,
    window_length: int = 2,
    two_channel: bool = False,
) -> np.ndarray:
    """One trial's EEG feature vector via the full processing pipeline."""
    rec = make_eeg_recording(rng, seconds=2.0 * window_length)
    return eeg_mod.features_from_recording(
        rec, window_length=window_length, two_channel=two_channel
    )


def make_synthetic_library(
    rng: np.random.Generator,
    n_songs: int = 80,
    n_active_dims: int = 24,
) -> tuple[list[SongRecord], np.ndarray]:
    """Songs with sparse synthetic feature vectors, evenly annotated.

    Returns (songs, active_dims).  Active dims live in the mean block of
    the 1665-dim layout and vary uniformly; everything else is constant
    and will be dropped by the reduction stage.
    """
    active = np.sort(rng.choice(555, size=n_active_dims, replace=False))
    base = np.zeros(MUSIC_FEATURE_DIM)
    songs = []
    genres = ("Rock", "Jazz", "Pop", "Classical")
    for i in range(n_songs):
        quadrant = QUADRANTS[i % 4]
        v_lo, v_hi, a_lo, a_hi = _ANNOTATION_BOXES[quadrant]
        vec = base.copy()
        vec[active] = rng.uniform(0.0, 1.0, size=n_active_dims)
        songs.append(
            SongRecord(
                song_id=f"syn{i:04d}",
                audio_path=f"synthetic://syn{i:04d}",
                genre=genres[i % len(genres)],
                valence_raw=float(rng.uniform(v_lo, v_hi)),
                arousal_raw=float(rng.uniform(a_lo, a_hi)),
                feature_vector=vec,
            )
        )
    return songs, active


Responder = Callable[[np.ndarray, SongRecord], VAScore]


@dataclass
class LinearResponder:
    """Noiseless responder: each axis sign is a linear function of the
    concatenated (EEG features, music features) vector."""

    w_eeg_valence: np.ndarray
    w_eeg_arousal: np.ndarray
    w_music_valence: np.ndarray  # full 1665-dim, sparse
    w_music_arousal: np.ndarray
    bias_valence: float = 0.0
    bias_arousal: float = 0.0

    def axis_score(self, axis: str, eeg_features: np.ndarray, song: SongRecord) -> float:
        if axis == "valence":
            w_e, w_m, b = self.w_eeg_valence, self.w_music_valence, self.bias_valence
        else:
            w_e, w_m, b = self.w_eeg_arousal, self.w_music_arousal, self.bias_arousal
        return float(w_e @ eeg_features + w_m @ song.feature_vector + b)

    def __call__(self, eeg_features: np.ndarray, song: SongRecord) -> VAScore:
        v = self.axis_score("valence", eeg_features, song)
        a = self.axis_score("arousal", eeg_features, song)
        return VAScore(2.0 if v > 0 else -2.0, 2.0 if a > 0 else -2.0)


def make_linear_responder(
    rng: np.random.Generator,
    library: Sequence[SongRecord],
    active_dims: np.ndarray,
    eeg_dim: int = 40,
    eeg_coupling: float = 0.1,
    eeg_feature_scale: Optional[np.ndarray] = None,
) -> LinearResponder:
    """Random linear responder calibrated against the library.

    Music weights act on the library's active dims; the bias centers each
    axis score at the library median so both classes occur.  EEG weights
    touch two dims per axis, scaled so the EEG term's spread is
    ``eeg_coupling`` times the music term's spread.
    """
    def axis_weights():
        w_m = np.zeros(MUSIC_FEATURE_DIM)
        w_m[active_dims] = rng.standard_normal(active_dims.shape[0])
        scores = np.array([w_m @ s.feature_vector for s in library])
        bias = -float(np.median(scores))
        music_spread = float(np.std(scores))
        w_e = np.zeros(eeg_dim)
        picks = rng.choice(eeg_dim, size=2, replace=False)
        scale = (
            eeg_feature_scale[picks]
            if eeg_feature_scale is not None
            else np.ones(2)
        )
        w_e[picks] = (
            eeg_coupling * music_spread * rng.standard_normal(2) / np.maximum(scale, 1e-12)
        )
        return w_e, w_m, bias

    w_ev, w_mv, b_v = axis_weights()
    w_ea, w_ma, b_a = axis_weights()
    return LinearResponder(
        w_eeg_valence=w_ev,
        w_eeg_arousal=w_ea,
        w_music_valence=w_mv,
        w_music_arousal=w_ma,
        bias_valence=b_v,
        bias_arousal=b_a,
    )


def margin_filter_library(
    library: Sequence[SongRecord],
    responder: LinearResponder,
    min_margin: float = 0.3,
) -> list[SongRecord]:
    """Drop songs whose music-only responder score sits near either axis
    boundary (within ``min_margin`` standard deviations).

    Borderline songs otherwise become persistent false positives of the
    trained model in the closed loop; a separation band makes the
    scenario's Bayes accuracy effectively 1.
    """
    zero_eeg_v = np.zeros_like(responder.w_eeg_valence)
    scores = {
        axis: np.array(
            [
                responder.axis_score(axis, zero_eeg_v, s)
                for s in library
            ]
        )
        for axis in ("valence", "arousal")
    }
    keep = np.ones(len(library), dtype=bool)
    for axis_scores in scores.values():
        keep &= np.abs(axis_scores) >= min_margin * np.std(axis_scores)
    return [s for s, k in zip(library, keep) if k]


@dataclass
class RandomResponder:
    """Uniform-random quadrant response, independent of all inputs."""

    rng: np.random.Generator

    def __call__(self, eeg_features: np.ndarray, song: SongRecord) -> VAScore:
        v, a = QUADRANTS[int(self.rng.integers(4))].signs
        return VAScore(2.0 * v, 2.0 * a)


def make_closed_loop_scenario(
    seed: int = 42,
    n_songs: int = 160,
    n_active_dims: int = 16,
    eeg_coupling: float = 0.05,
) -> tuple[list[SongRecord], LinearResponder, np.random.Generator]:
    """Library + calibrated noiseless responder + session RNG, all seeded."""
    rng = np.random.default_rng(seed)
    library, active = make_synthetic_library(rng, n_songs, n_active_dims)
    scale = eeg_feature_scale(np.random.default_rng(seed + 1))
    responder = make_linear_responder(
        rng, library, active, eeg_coupling=eeg_coupling, eeg_feature_scale=scale
    )
    return margin_filter_library(library, responder), responder, rng


@dataclass
class SimulationConfig:
    training_days: int = 6
    experiments_per_day: int = 2
    trials_per_quadrant: int = 3  # per experiment -> 12 trials/experiment
    testing_trials: int = 48
    window_length: int = 2
    two_channel: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)


def _repeat_schedule(
    rng: np.random.Generator, pool: list[SongRecord], n_slots: int
) -> list[SongRecord]:
    """Song slots for one quadrant with 25-35% repeated songs (2-5 plays)."""
    counts = [2, 2, 2, 3, 3, 3, 3]  # 7 repeaters, 18 slots
    total_repeat_slots = sum(counts)
    n_unique = n_slots - total_repeat_slots
    if n_unique < 0 or len(pool) < len(counts) + n_unique:
        # Small schedules fall back to plain sampling with replacement.
        return [pool[int(rng.integers(len(pool)))] for _ in range(n_slots)]
    order = rng.permutation(len(pool))
    repeaters = [pool[i] for i in order[: len(counts)]]
    uniques = [pool[i] for i in order[len(counts) : len(counts) + n_unique]]
    slots = [s for s, c in zip(repeaters, counts) for _ in range(c)] + uniques
    perm = rng.permutation(len(slots))
    return [slots[i] for i in perm]


def run_training_phase(
    library: Sequence[SongRecord],
    responder: Responder,
    config: SimulationConfig,
    rng: np.random.Generator,
    user_id: str = "sim",
) -> list[TrialRecord]:
    """The multi-day training protocol with the song-repetition policy."""
    state = engine.SessionState(
        user_id=user_id, phase="training", seed=int(rng.integers(2**31))
    )
    n_experiments = config.training_days * config.experiments_per_day
    slots_per_quadrant = n_experiments * config.trials_per_quadrant
    schedules = {}
    for q in QUADRANTS:
        pool = [s for s in library if s.annotation_quadrant == q]
        schedules[q] = _repeat_schedule(rng, pool, slots_per_quadrant)
    trials = []
    slot = 0
    for _exp in range(n_experiments):
        for i in range(config.trials_per_quadrant):
            for q in QUADRANTS:
                song = schedules[q][slot + i]
                feats = trial_eeg_features(
                    rng, config.window_length, config.two_channel
                )
                reported = responder(feats, song)
                trials.append(
                    engine.run_training_trial(state, song, feats, reported, timestamp=0.0)
                )
        slot += config.trials_per_quadrant
    return trials


def run_testing_phase(
    model: TrainedModel,
    library: Sequence[SongRecord],
    responder: Responder,
    n_trials: int,
    rng: np.random.Generator,
    config: Optional[SimulationConfig] = None,
    user_id: str = "sim",
) -> list[TrialRecord]:
    """Testing protocol: designate, collect EEG, recommend, report."""
    config = config or SimulationConfig()
    state = engine.SessionState(
        user_id=user_id, phase="testing", seed=int(rng.integers(2**31))
    )
    trials = []
    for i in range(n_trials):
        designated = QUADRANTS[i % 4]
        feats = trial_eeg_features(rng, config.window_length, config.two_channel)
        state.designated_quadrant = designated
        state.current_eeg_features = feats
        rec = engine.recommend(designated, feats, library, model, state.rng)
        reported = responder(feats, rec.song)
        trials.append(
            state.log_trial(rec.song, reported, designated=designated, timestamp=0.0)
        )
    return trials


def run_random_policy(
    library: Sequence[SongRecord],
    responder: Responder,
    n_trials: int,
    rng: np.random.Generator,
    config: Optional[SimulationConfig] = None,
    user_id: str = "rand",
) -> list[TrialRecord]:
    """Baseline: random pick from the designated annotation quadrant."""
    config = config or SimulationConfig()
    state = engine.SessionState(
        user_id=user_id, phase="testing", seed=int(rng.integers(2**31))
    )
    trials = []
    for i in range(n_trials):
        designated = QUADRANTS[i % 4]
        feats = trial_eeg_features(rng, config.window_length, config.two_channel)
        state.current_eeg_features = feats
        song = engine.select_music_alternatives(designated, library, 1, state.rng)[0]
        reported = responder(feats, song)
        trials.append(
            state.log_trial(song, reported, designated=designated, timestamp=0.0)
        )
    return trials


@dataclass
class DayReport:
    day: int
    match_rate: float
    new_song_ratio: float
    t_valence: float
    t_arousal: float


def run_real_life_phase(
    model: TrainedModel,
    library: Sequence[SongRecord],
    responder: Responder,
    songs_by_id: dict[str, SongRecord],
    history: list[TrialRecord],
    days: int,
    rng: np.random.Generator,
    config: Optional[SimulationConfig] = None,
    retrain_each_day: bool = True,
    user_id: str = "sim",
) -> tuple[list[DayReport], TrainedModel]:
    """Multi-day real-life scenario with daily retraining.

    ``history`` is the accumulated training data; each day's sessions are
    appended and (optionally) the model is retrained on the grown log.
    """
    config = config or SimulationConfig()
    seen: set[str] = {t.song_id for t in history}
    reports = []
    for day in range(1, days + 1):
        day_trials: list[TrialRecord] = []
        for _sess in range(config.experiments_per_day):
            state = engine.SessionState(
                user_id=user_id, phase="real_life", seed=int(rng.integers(2**31))
            )
            state.designated_quadrant = QUADRANTS[int(rng.integers(4))]
            state.current_eeg_features = trial_eeg_features(
                rng, config.window_length, config.two_channel
            )
            playlist_len = int(rng.integers(10, 14))
            day_trials.extend(
                engine.run_real_life_session(
                    state, library, model, responder, playlist_len, timestamp=float(day)
                )
            )
        new_ratio = float(
            np.mean([t.song_id not in seen for t in day_trials])
        ) if day_trials else 0.0
        seen.update(t.song_id for t in day_trials)
        history = history + day_trials
        t_v, t_a = engine.instability_scores(history)
        reports.append(
            DayReport(
                day=day,
                match_rate=engine.match_rate(day_trials),
                new_song_ratio=new_ratio,
                t_valence=t_v,
                t_arousal=t_a,
            )
        )
        if retrain_each_day and day < days:
            model = train_user_model(
                model.user_id, history, songs_by_id, model.config
            )
    return reports, model


def report_csv(reports: Sequence[DayReport]) -> str:
    """Deterministic plot-ready CSV for the per-day report rows."""
    lines = ["day,match_rate,new_song_ratio,t_arousal,t_valence"]
    for r in reports:
        lines.append(
            f"{r.day},{r.match_rate:.6f},{r.new_song_ratio:.6f},"
            f"{r.t_arousal:.6f},{r.t_valence:.6f}"
        )
    return "\n".join(lines) + "\n"


def eeg_feature_scale(
    rng: np.random.Generator, window_length: int = 2, n_probe: int = 20
) -> np.ndarray:
    """Empirical per-dim std of pipeline EEG features, for responder scaling."""
    feats = np.stack(
        [trial_eeg_features(rng, window_length) for _ in range(n_probe)]
    )
    return feats.std(axis=0)
