"""Interactive protocols: music alternatives, the recommendation loop,
match-rate evaluation and the transition-frequency instability score.

All randomness flows through an explicit ``numpy.random.Generator`` so a
session replays identically given the same seed, model and library.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Quadrant, SongRecord, TrialRecord, VAScore, quadrant_of
from .errors import (
    InsufficientDataError,
    NoCandidatesError,
    UndefinedCorrelationError,
    UndefinedScoreError,
)
from .pipeline import TrainedModel

MAX_RECOMMEND_ITERATIONS = 5
N_ALTERNATIVES = 5


def select_music_alternatives(
    designated: Quadrant,
    library: Sequence[SongRecord],
    n: int = N_ALTERNATIVES,
    rng: Optional[np.random.Generator] = None,
) -> list[SongRecord]:
    """Sample up to ``n`` songs annotated in the designated quadrant."""
    rng = rng or np.random.default_rng()
    pool = [s for s in library if s.annotation_quadrant == designated]
    if not pool:
        raise NoCandidatesError(f"no song annotated in {designated.value}")
    if len(pool) <= n:
        order = rng.permutation(len(pool))
        return [pool[i] for i in order]
    picks = rng.choice(len(pool), size=n, replace=False)
    return [pool[i] for i in picks]


@dataclass
class Recommendation:
    song: SongRecord
    iteration_count: int
    matched: bool  # a predicted-match existed (not the user's verdict)


def recommend(
    designated: Quadrant,
    eeg_features: np.ndarray,
    library: Sequence[SongRecord],
    model: TrainedModel,
    rng: np.random.Generator,
    max_iter: int = MAX_RECOMMEND_ITERATIONS,
    n_alternatives: int = N_ALTERNATIVES,
) -> Recommendation:
    """Iteratively draw alternatives until one is predicted to match.

    After ``max_iter`` fruitless rounds a song is picked uniformly from
    the last round's alternatives with ``matched=False``.
    """
    last_mas: list[SongRecord] = []
    for iteration in range(1, max_iter + 1):
        mas = select_music_alternatives(designated, library, n_alternatives, rng)
        last_mas = mas
        matches = [
            s
            for s in mas
            if model.predict_quadrant(eeg_features, s.feature_vector) == designated
        ]
        if matches:
            song = matches[int(rng.integers(len(matches)))]
            return Recommendation(song=song, iteration_count=iteration, matched=True)
    song = last_mas[int(rng.integers(len(last_mas)))]
    return Recommendation(song=song, iteration_count=max_iter, matched=False)


@dataclass
class SessionState:
    user_id: str
    phase: str  # training | testing | real_life
    seed: int
    designated_quadrant: Optional[Quadrant] = None
    current_eeg_features: Optional[np.ndarray] = None
    trial_log: list[TrialRecord] = field(default_factory=list)
    played_song_ids: set[str] = field(default_factory=set)
    rng: np.random.Generator = field(init=False, repr=False)
    _trial_counter: int = 0

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)

    def next_trial_id(self) -> str:
        self._trial_counter += 1
        return f"{self.user_id}-{self.phase}-{self._trial_counter:04d}"

    def log_trial(
        self,
        song: SongRecord,
        reported: VAScore,
        designated: Optional[Quadrant] = None,
        timestamp: Optional[float] = None,
    ) -> TrialRecord:
        record = TrialRecord(
            trial_id=self.next_trial_id(),
            user_id=self.user_id,
            timestamp=time.time() if timestamp is None else timestamp,
            eeg_features=self.current_eeg_features,
            song_id=song.song_id,
            evaluated_score=reported,
            phase=self.phase,
            designated_quadrant=designated,
        )
        self.trial_log.append(record)
        self.played_song_ids.add(song.song_id)
        return record


def run_training_trial(
    state: SessionState,
    song: SongRecord,
    eeg_features: np.ndarray,
    reported: VAScore,
    timestamp: Optional[float] = None,
) -> TrialRecord:
    """Log one training observation (pre-song EEG, song, reported score)."""
    assert state.phase == "training"
    state.current_eeg_features = np.asarray(eeg_features, dtype=float)
    return state.log_trial(song, reported, designated=None, timestamp=timestamp)


def run_real_life_session(
    state: SessionState,
    library: Sequence[SongRecord],
    model: TrainedModel,
    responder,
    playlist_len: int = 10,
    timestamp: float = 0.0,
) -> list[TrialRecord]:
    """One real-life experiment: one designation + one EEG collection,
    then a playlist of distinct songs built by repeated recommendation.

    ``responder`` maps (eeg_features, song) -> VAScore.  Returns the
    trial records of this session (also appended to the session log).
    """
    assert state.phase == "real_life"
    if state.designated_quadrant is None or state.current_eeg_features is None:
        raise InsufficientDataError("designate and collect EEG before the playlist")
    records = []
    session_played: set[str] = set()
    for _ in range(playlist_len):
        candidates = [s for s in library if s.song_id not in session_played]
        try:
            rec = recommend(
                state.designated_quadrant,
                state.current_eeg_features,
                candidates,
                model,
                state.rng,
            )
        except NoCandidatesError:
            break  # library exhausted for this quadrant; shorter playlist
        session_played.add(rec.song.song_id)
        reported = responder(state.current_eeg_features, rec.song)
        records.append(
            state.log_trial(
                rec.song,
                reported,
                designated=state.designated_quadrant,
                timestamp=timestamp,
            )
        )
    return records


def transition_frequency(sequence: Sequence[int]) -> float:
    """Adjacent-transition rate of one binary sequence: changes / (N-1)."""
    seq = np.asarray(sequence)
    if seq.shape[0] < 2:
        raise UndefinedScoreError("need at least two listens")
    return float(np.mean(np.abs(np.diff(seq)) > 0))


def t_score(histories: Iterable[Sequence[int]]) -> float:
    """Mean transition frequency over songs listened to at least twice."""
    rates = [
        transition_frequency(h) for h in histories if len(h) >= 2
    ]
    if not rates:
        raise UndefinedScoreError("no song was listened to more than once")
    return float(np.mean(rates))


def binary_histories(
    trials: Sequence[TrialRecord], axis: str
) -> dict[str, list[int]]:
    """Per-song binary state sequences (1 = positive axis sign)."""
    idx = 0 if axis == "valence" else 1
    out: dict[str, list[int]] = {}
    for t in trials:
        value = (t.evaluated_score.valence, t.evaluated_score.arousal)[idx]
        out.setdefault(t.song_id, []).append(1 if value > 0 else 0)
    return out


def instability_scores(trials: Sequence[TrialRecord]) -> tuple[float, float]:
    """(t_valence, t_arousal) from a trial log."""
    return (
        t_score(binary_histories(trials, "valence").values()),
        t_score(binary_histories(trials, "arousal").values()),
    )


def match_rate(trials: Sequence[TrialRecord]) -> float:
    """Fraction of trials whose designated and evaluated quadrants agree."""
    flagged = [t for t in trials if t.designated_quadrant is not None]
    if not flagged:
        raise InsufficientDataError("no trial carries a designated quadrant")
    return float(np.mean([t.matched for t in flagged]))


def annotation_match_rate(
    trials: Sequence[TrialRecord], songs_by_id: dict[str, SongRecord]
) -> float:
    """Training-mode match: song annotation quadrant vs evaluated quadrant."""
    if not trials:
        raise InsufficientDataError("empty trial set")
    hits = [
        songs_by_id[t.song_id].annotation_quadrant == t.evaluated_quadrant
        for t in trials
    ]
    return float(np.mean(hits))


def correlate_instability(
    t_scores: Sequence[float], neuroticism_rewritten: Sequence[float]
) -> float:
    """Sample Pearson correlation between per-user t-scores and the
    rewritten (1 - score/100) neuroticism values."""
    a = np.asarray(t_scores, dtype=float)
    b = np.asarray(neuroticism_rewritten, dtype=float)
    if a.shape != b.shape or a.shape[0] < 3:
        raise InsufficientDataError("need >= 3 paired users")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise UndefinedCorrelationError("non-finite input")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedCorrelationError("zero variance in an input vector")
    return float(np.corrcoef(a, b)[0, 1])


def rewrite_neuroticism(score_percent: float) -> float:
    """Map a Big-5 neuroticism percentile to the instability scale."""
    return 1.0 - score_percent / 100.0
