"""Domain types: valence/arousal scores, quadrants, songs and trials.

All types are immutable value objects and all operations are pure.
Scores are kept at full precision; discretization happens only in
``quadrant_of``.  The zero rule is: a strictly positive component counts
as the positive class, zero and negative count as the negative class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidAnnotationError, InvalidScoreError

GENRES = (
    "Blues",
    "Electronic",
    "Rock",
    "Classical",
    "Folk",
    "Jazz",
    "Country",
    "Pop",
)

SCORE_RANGE = (-5.0, 5.0)
ANNOTATION_RANGE = (1.0, 9.0)


class Quadrant(Enum):
    """Four sign combinations of (valence, arousal)."""

    Q1 = "Q1"  # +v, +a
    Q2 = "Q2"  # -v, +a
    Q3 = "Q3"  # -v, -a
    Q4 = "Q4"  # +v, -a

    @staticmethod
    def from_signs(valence_positive: bool, arousal_positive: bool) -> "Quadrant":
        if arousal_positive:
            return Quadrant.Q1 if valence_positive else Quadrant.Q2
        return Quadrant.Q4 if valence_positive else Quadrant.Q3

    @property
    def signs(self) -> tuple[int, int]:
        """(valence sign, arousal sign) as +1/-1."""
        return {
            Quadrant.Q1: (1, 1),
            Quadrant.Q2: (-1, 1),
            Quadrant.Q3: (-1, -1),
            Quadrant.Q4: (1, -1),
        }[self]


@dataclass(frozen=True)
class VAScore:
    """A signed valence/arousal pair on the [-5, 5] slider scale."""

    valence: float
    arousal: float

    def __post_init__(self):
        for name, v in (("valence", self.valence), ("arousal", self.arousal)):
            if not math.isfinite(v):
                raise InvalidScoreError(f"{name} is not finite: {v!r}")
            if not SCORE_RANGE[0] <= v <= SCORE_RANGE[1]:
                raise InvalidScoreError(f"{name} outside {SCORE_RANGE}: {v!r}")

    @property
    def quadrant(self) -> Quadrant:
        return quadrant_of(self)


def quadrant_of(score: VAScore) -> Quadrant:
    """Discretize a score into its quadrant (zero counts as negative)."""
    return Quadrant.from_signs(score.valence > 0, score.arousal > 0)


def rescale_annotation(raw: float) -> float:
    """Map a 1..9 crowd annotation to the signed scale by subtracting 5."""
    if not (math.isfinite(raw) and ANNOTATION_RANGE[0] <= raw <= ANNOTATION_RANGE[1]):
        raise InvalidAnnotationError(f"annotation outside {ANNOTATION_RANGE}: {raw!r}")
    return raw - 5.0


@dataclass(frozen=True)
class SongRecord:
    """One library song with its crowd annotation and cached features."""

    song_id: str
    audio_path: str
    genre: str
    valence_raw: float
    arousal_raw: float
    feature_vector: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.genre not in GENRES:
            raise InvalidAnnotationError(
                f"unknown genre {self.genre!r} for song {self.song_id}"
            )
        # Validates the 1..9 range as a side effect.
        rescale_annotation(self.valence_raw)
        rescale_annotation(self.arousal_raw)
        if self.feature_vector is not None and not np.all(
            np.isfinite(self.feature_vector)
        ):
            raise InvalidScoreError(
                f"non-finite feature vector for song {self.song_id}"
            )

    @property
    def rescaled_annotation(self) -> tuple[float, float]:
        return (self.valence_raw - 5.0, self.arousal_raw - 5.0)

    @property
    def annotation_quadrant(self) -> Quadrant:
        v, a = self.rescaled_annotation
        return Quadrant.from_signs(v > 0, a > 0)

    def with_features(self, values: np.ndarray) -> "SongRecord":
        return SongRecord(
            song_id=self.song_id,
            audio_path=self.audio_path,
            genre=self.genre,
            valence_raw=self.valence_raw,
            arousal_raw=self.arousal_raw,
            feature_vector=np.asarray(values, dtype=float),
        )


PHASES = ("training", "testing", "real_life")


@dataclass(frozen=True)
class TrialRecord:
    """One observation: EEG features + song + the user's evaluated score."""

    trial_id: str
    user_id: str
    timestamp: float
    eeg_features: np.ndarray
    song_id: str
    evaluated_score: VAScore
    phase: str
    designated_quadrant: Optional[Quadrant] = None

    def __post_init__(self):
        if self.phase not in PHASES:
            raise InvalidScoreError(f"unknown phase {self.phase!r}")
        object.__setattr__(
            self, "eeg_features", np.asarray(self.eeg_features, dtype=float)
        )
        if not np.all(np.isfinite(self.eeg_features)):
            raise InvalidScoreError(f"non-finite EEG features in {self.trial_id}")

    @property
    def evaluated_quadrant(self) -> Quadrant:
        return quadrant_of(self.evaluated_score)

    @property
    def matched(self) -> Optional[bool]:
        if self.designated_quadrant is None:
            return None
        return self.designated_quadrant == self.evaluated_quadrant


def axis_labels(scores: Sequence[VAScore]) -> tuple[np.ndarray, np.ndarray]:
    """Binary (+1/-1) valence and arousal labels under the zero rule."""
    v = np.array([1 if s.valence > 0 else -1 for s in scores], dtype=float)
    a = np.array([1 if s.arousal > 0 else -1 for s in scores], dtype=float)
    return v, a
