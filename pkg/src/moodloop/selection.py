"""Sequential backward selection driven by a cross-validation evaluator.

Features are removed one at a time; at every step the removal that
maximizes the evaluator score wins, ties broken toward the lowest
feature index.  The CV fold assignment is frozen once per run so scores
stay comparable across steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import svm
from .errors import DegenerateLabelsError, InsufficientDataError


@dataclass
class SBSResult:
    selected_indices: list[int]  # ascending original indices
    removal_trace: list[tuple[int, float]]  # (removed index, score after removal)
    final_score: float
    evaluator_calls: int


def sbs(
    X: np.ndarray,
    y: np.ndarray,
    target_k: int,
    evaluator: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
    seed: int = 0,
    cv_folds: int = 7,
    C: float = 1.0,
    evaluator_tol: float = 1e-3,
    evaluator_max_epochs: int = 500,
) -> SBSResult:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if not 1 <= target_k <= d:
        raise InsufficientDataError(f"target_k={target_k} outside 1..{d}")
    if np.unique(y).size < 2:
        raise DegenerateLabelsError("SBS needs both classes present")

    if evaluator is None:
        folds = svm.stratified_folds(y, cv_folds, seed)

        # A looser solver tolerance is enough for ranking candidate
        # removals and keeps the O(d^2) scan affordable.
        def evaluator(Xs, ys):
            return svm.evaluate_folds(
                Xs, ys, folds, C=C,
                max_epochs=evaluator_max_epochs, tol=evaluator_tol,
            ).mean

    selected = list(range(d))
    trace: list[tuple[int, float]] = []
    calls = 0
    final_score = float("nan")
    while len(selected) > target_k:
        best_score = -np.inf
        best_idx = None
        for idx in selected:  # ascending order makes ties keep-lowest
            remaining = [j for j in selected if j != idx]
            score = float(evaluator(X[:, remaining], y))
            calls += 1
            if score > best_score:
                best_score = score
                best_idx = idx
        selected.remove(best_idx)
        trace.append((best_idx, best_score))
        final_score = best_score
    if np.isnan(final_score):
        final_score = float(evaluator(X[:, selected], y))
        calls += 1
    return SBSResult(
        selected_indices=selected,
        removal_trace=trace,
        final_score=final_score,
        evaluator_calls=calls,
    )


def selection_profile(selected_indices: list[int], eeg_dim: int) -> tuple[int, int]:
    """Split a selection over [EEG | music] concatenated features into counts."""
    n_eeg = sum(1 for i in selected_indices if i < eeg_dim)
    return n_eeg, len(selected_indices) - n_eeg
