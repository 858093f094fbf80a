"""Per-user training pipeline: reduction -> SBS -> class-weighted SVM.

The feature space seen by the valence and arousal models is the
concatenation ``[EEG block | music block]``.  Music features go through
the three-stage reduction, min-max normalization and an annotation-driven
SBS stage; EEG features are z-scored.  Each model then gets its own SBS
pass over the concatenated space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import audio, selection, svm
from .core import Quadrant, SongRecord, TrialRecord, axis_labels
from .errors import DegenerateLabelsError, DimensionMismatchError, InsufficientDataError

AXES = ("valence", "arousal")


@dataclass
class TrainConfig:
    music_target: int = 50  # music dims kept by the annotation-driven SBS
    final_target: int = 25  # dims kept per model on the concatenated space
    cv_folds: int = 7
    svm_C: float = 1.0
    seed: int = 0
    window_length: int = 2
    two_channel: bool = False

    def as_dict(self) -> dict:
        return {
            "music_target": self.music_target,
            "final_target": self.final_target,
            "cv_folds": self.cv_folds,
            "svm_C": self.svm_C,
            "seed": self.seed,
            "window_length": self.window_length,
            "two_channel": self.two_channel,
        }


def concat_features(eeg_block: np.ndarray, music_block: np.ndarray) -> np.ndarray:
    """EEG block then music block, fixed order."""
    return np.concatenate(
        [np.asarray(eeg_block, dtype=float), np.asarray(music_block, dtype=float)]
    )


@dataclass
class AxisModel:
    """One binary model (valence or arousal) plus its selection."""

    model: svm.LinearModel
    music_sbs: selection.SBSResult  # over the reduced music space
    final_sbs: selection.SBSResult  # over [EEG | music-selected]
    cv: svm.CVResult

    def music_indices(self) -> list[int]:
        return self.music_sbs.selected_indices


@dataclass
class TrainedModel:
    """Everything needed to predict a user's emotion-variation quadrant."""

    user_id: str
    config: TrainConfig
    eeg_dim: int
    reduction: audio.ReductionReport
    music_norm: audio.NormStats  # over the reduced music space
    eeg_norm: audio.NormStats
    valence: AxisModel
    arousal: AxisModel
    training_trials: int = 0
    training_digest: str = ""

    def axis(self, name: str) -> AxisModel:
        if name not in AXES:
            raise KeyError(name)
        return self.valence if name == "valence" else self.arousal

    def music_block(self, raw_music: np.ndarray, axis: str) -> np.ndarray:
        """Reduced, normalized, SBS-selected music features for one axis."""
        raw_music = np.asarray(raw_music, dtype=float)
        if raw_music.shape[0] <= max(self.reduction.kept_indices, default=-1):
            raise DimensionMismatchError("music vector shorter than reduction map")
        reduced = raw_music[self.reduction.kept_indices]
        normed = self.music_norm.transform(reduced)
        return normed[self.axis(axis).music_indices()]

    def combined_vector(
        self, eeg_features: np.ndarray, raw_music: np.ndarray, axis: str
    ) -> np.ndarray:
        eeg = self.eeg_norm.transform(np.asarray(eeg_features, dtype=float))
        combined = concat_features(eeg, self.music_block(raw_music, axis))
        return combined[self.axis(axis).final_sbs.selected_indices]

    def predict_axis(
        self, eeg_features: np.ndarray, raw_music: np.ndarray, axis: str
    ) -> int:
        x = self.combined_vector(eeg_features, raw_music, axis)
        return svm.predict(self.axis(axis).model, x)

    def predict_quadrant(
        self, eeg_features: np.ndarray, raw_music: np.ndarray
    ) -> Quadrant:
        v = self.predict_axis(eeg_features, raw_music, "valence")
        a = self.predict_axis(eeg_features, raw_music, "arousal")
        return Quadrant.from_signs(v > 0, a > 0)

    def selection_profile(self, axis: str) -> tuple[int, int]:
        """(EEG count, music count) among the final selected features."""
        return selection.selection_profile(
            self.axis(axis).final_sbs.selected_indices, self.eeg_dim
        )


def _annotation_labels(songs: Sequence[SongRecord], axis: str) -> np.ndarray:
    idx = 0 if axis == "valence" else 1
    return np.array(
        [1.0 if s.rescaled_annotation[idx] > 0 else -1.0 for s in songs]
    )


def train_user_model(
    user_id: str,
    trials: Sequence[TrialRecord],
    songs_by_id: dict[str, SongRecord],
    config: Optional[TrainConfig] = None,
) -> TrainedModel:
    """Build the valence/arousal model pair from logged training trials.

    ``songs_by_id`` must carry the raw 1665-dim feature vector for every
    song referenced by the trials.
    """
    config = config or TrainConfig()
    if len(trials) < 2 * config.cv_folds:
        raise InsufficientDataError(
            f"need at least {2 * config.cv_folds} trials, got {len(trials)}"
        )
    missing = [t.song_id for t in trials if t.song_id not in songs_by_id]
    if missing:
        raise InsufficientDataError(f"no song record for trial song(s) {missing[:3]}")
    songs = [songs_by_id[t.song_id] for t in trials]
    for s in songs:
        if s.feature_vector is None:
            raise InsufficientDataError(f"song {s.song_id} has no cached features")

    unique_songs = list({s.song_id: s for s in songs}.values())
    music_raw = np.stack([s.feature_vector for s in unique_songs])
    reduction = audio.reduce_features(music_raw)
    reduced = music_raw[:, reduction.kept_indices]
    _, music_norm = audio.fit_normalization(reduced, kind="minmax")
    music_normed_by_id = {
        s.song_id: music_norm.transform(s.feature_vector[reduction.kept_indices])
        for s in unique_songs
    }

    eeg_raw = np.stack([t.eeg_features for t in trials])
    _, eeg_norm = audio.fit_normalization(eeg_raw, kind="zscore")
    eeg_normed = eeg_norm.transform(eeg_raw)
    eeg_dim = eeg_raw.shape[1]

    v_labels, a_labels = axis_labels([t.evaluated_score for t in trials])
    labels = {"valence": v_labels, "arousal": a_labels}
    for axis, y in labels.items():
        if np.unique(y).size < 2:
            raise DegenerateLabelsError(f"{axis} labels contain a single class")

    axis_models = {}
    for axis in AXES:
        ann_y = _annotation_labels(unique_songs, axis)
        music_matrix = np.stack([music_normed_by_id[s.song_id] for s in unique_songs])
        target = min(config.music_target, music_matrix.shape[1])
        if np.unique(ann_y).size < 2:
            raise DegenerateLabelsError(
                f"annotation labels for {axis} contain a single class"
            )
        music_sbs = selection.sbs(
            music_matrix,
            ann_y,
            target_k=target,
            seed=config.seed,
            cv_folds=min(config.cv_folds, music_matrix.shape[0] // 2),
            C=config.svm_C,
        )
        combined = np.stack(
            [
                concat_features(
                    eeg_normed[i],
                    music_normed_by_id[t.song_id][music_sbs.selected_indices],
                )
                for i, t in enumerate(trials)
            ]
        )
        y = labels[axis]
        final_target = min(config.final_target, combined.shape[1])
        final_sbs = selection.sbs(
            combined,
            y,
            target_k=final_target,
            seed=config.seed,
            cv_folds=config.cv_folds,
            C=config.svm_C,
        )
        X = combined[:, final_sbs.selected_indices]
        model = svm.train_svm(X, y, C=config.svm_C)
        cv = svm.cross_validate(
            X, y, k=config.cv_folds, seed=config.seed, C=config.svm_C
        )
        axis_models[axis] = AxisModel(
            model=model, music_sbs=music_sbs, final_sbs=final_sbs, cv=cv
        )

    return TrainedModel(
        user_id=user_id,
        config=config,
        eeg_dim=eeg_dim,
        reduction=reduction,
        music_norm=music_norm,
        eeg_norm=eeg_norm,
        valence=axis_models["valence"],
        arousal=axis_models["arousal"],
        training_trials=len(trials),
    )
