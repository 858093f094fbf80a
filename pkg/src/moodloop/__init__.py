"""moodloop: EEG-conditioned closed-loop music emotion regulation."""

from .core import (
    GENRES,
    Quadrant,
    SongRecord,
    TrialRecord,
    VAScore,
    quadrant_of,
    rescale_annotation,
)
from .engine import (
    correlate_instability,
    match_rate,
    recommend,
    select_music_alternatives,
    t_score,
)
from .pipeline import TrainConfig, TrainedModel, train_user_model

__version__ = "0.1.0"

__all__ = [
    "GENRES",
    "Quadrant",
    "SongRecord",
    "TrialRecord",
    "VAScore",
    "quadrant_of",
    "rescale_annotation",
    "correlate_instability",
    "match_rate",
    "recommend",
    "select_music_alternatives",
    "t_score",
    "TrainConfig",
    "TrainedModel",
    "train_user_model",
    "__version__",
]
