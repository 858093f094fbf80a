"""Class-weighted binary linear SVM trained by dual coordinate descent.

The solver visits examples in a fixed order (no shuffling), so training
is fully deterministic.  Unbalanced classes are handled by scaling the
per-example cost with the inverse label frequency:
``C_i = C * n_total / (2 * n_class(y_i))``.

The bias is learned by augmenting each example with a constant 1 (the
bias is therefore lightly regularized, which is the usual trade-off of
this formulation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DegenerateLabelsError, DimensionMismatchError, StratificationError


@njit(cache=True)
def _dual_cd(X, y, cost, max_epochs, tol):  # pragma: no cover - jitted
    n, d = X.shape
    w = np.zeros(d)
    alpha = np.zeros(n)
    qdiag = np.zeros(n)
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += X[i, j] * X[i, j]
        qdiag[i] = s
    dual_trace = np.zeros(max_epochs)
    epochs = 0
    max_pg = 0.0
    for epoch in range(max_epochs):
        max_pg = 0.0
        for i in range(n):
            g = 0.0
            for j in range(d):
                g += w[j] * X[i, j]
            g = y[i] * g - 1.0
            if alpha[i] <= 0.0:
                pg = min(g, 0.0)
            elif alpha[i] >= cost[i]:
                pg = max(g, 0.0)
            else:
                pg = g
            apg = abs(pg)
            if apg > max_pg:
                max_pg = apg
            if apg > 1e-14 and qdiag[i] > 0.0:
                a_new = alpha[i] - g / qdiag[i]
                if a_new < 0.0:
                    a_new = 0.0
                elif a_new > cost[i]:
                    a_new = cost[i]
                delta = (a_new - alpha[i]) * y[i]
                if delta != 0.0:
                    for j in range(d):
                        w[j] += delta * X[i, j]
                    alpha[i] = a_new
        wnorm = 0.0
        for j in range(d):
            wnorm += w[j] * w[j]
        asum = 0.0
        for i in range(n):
            asum += alpha[i]
        dual_trace[epoch] = asum - 0.5 * wnorm
        epochs = epoch + 1
        if max_pg < tol:
            break
    return w, alpha, epochs, max_pg, dual_trace[:epochs]


@dataclass
class LinearModel:
    """Trained linear separator: sign(weights . x + bias), sign(0) -> +1."""

    weights: np.ndarray
    bias: float
    class_weights: tuple[float, float]  # (cost for +1, cost for -1)
    C: float
    epochs: int
    converged: bool
    dual_objective: np.ndarray = field(repr=False)
    duality_gap: float = float("nan")

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.weights.shape[0]:
            raise DimensionMismatchError(
                f"expected {self.weights.shape[0]} features, got {X.shape[1]}"
            )
        return X @ self.weights + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        f = self.decision_function(X)
        return np.where(f >= 0.0, 1.0, -1.0)


def predict(model: LinearModel, x: np.ndarray) -> int:
    """Predict a single example; returns +1 or -1."""
    return int(model.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])


def _check_labels(y: np.ndarray) -> None:
    classes = np.unique(y)
    if not np.all(np.isin(classes, (-1.0, 1.0))):
        raise DegenerateLabelsError(f"labels must be in {{-1,+1}}, got {classes}")
    if classes.size < 2:
        raise DegenerateLabelsError("training data contains a single class")


def train_svm(
    X: np.ndarray,
    y: np.ndarray,
    C: float = 1.0,
    max_epochs: int = 10_000,
    tol: float = 1e-6,
) -> LinearModel:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError("X and y disagree on sample count")
    _check_labels(y)
    n = y.shape[0]
    n_pos = int(np.sum(y > 0))
    n_neg = n - n_pos
    c_pos = C * n / (2.0 * n_pos)
    c_neg = C * n / (2.0 * n_neg)
    cost = np.where(y > 0, c_pos, c_neg)

    Xa = np.hstack([X, np.ones((n, 1))])
    w, alpha, epochs, max_pg, dual_trace = _dual_cd(
        Xa, y, cost, max_epochs, tol
    )

    f = Xa @ w
    primal = 0.5 * float(w @ w) + float(np.sum(cost * np.maximum(0.0, 1.0 - y * f)))
    dual = float(np.sum(alpha)) - 0.5 * float(w @ w)
    gap = primal - dual
    converged = bool(max_pg < tol or gap / max(primal, 1.0) < 1e-6)
    return LinearModel(
        weights=w[:-1].copy(),
        bias=float(w[-1]),
        class_weights=(c_pos, c_neg),
        C=C,
        epochs=int(epochs),
        converged=converged,
        dual_objective=np.asarray(dual_trace),
        duality_gap=gap,
    )


def stratified_folds(
    y: np.ndarray, k: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Label-ratio-preserving k-fold split, deterministic under ``seed``."""
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    if n < k:
        raise StratificationError(f"need at least k={k} examples, got {n}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=int)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < 2:
            raise StratificationError(
                f"class {cls:+g} has {idx.size} example(s); it would vanish "
                "from some training fold"
            )
        rng.shuffle(idx)
        fold_of[idx] = np.arange(idx.size) % k
    folds = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        if test.size == 0:
            continue
        if np.unique(y[train]).size < 2:
            raise StratificationError(f"fold {f} leaves a single-class training set")
        folds.append((train, test))
    return folds


@dataclass
class CVResult:
    mean: float
    std: float
    fold_accuracies: np.ndarray


def evaluate_folds(
    X: np.ndarray,
    y: np.ndarray,
    folds: list[tuple[np.ndarray, np.ndarray]],
    C: float = 1.0,
    max_epochs: int = 10_000,
    tol: float = 1e-6,
) -> CVResult:
    """Accuracy over a pre-computed fold assignment (frozen folds for SBS)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    accs = np.empty(len(folds))
    for i, (train, test) in enumerate(folds):
        model = train_svm(X[train], y[train], C=C, max_epochs=max_epochs, tol=tol)
        accs[i] = float(np.mean(model.predict(X[test]) == y[test]))
    return CVResult(mean=float(np.mean(accs)), std=float(np.std(accs)), fold_accuracies=accs)


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    k: int = 7,
    seed: int = 0,
    C: float = 1.0,
    max_epochs: int = 10_000,
    tol: float = 1e-6,
) -> CVResult:
    _check_labels(np.asarray(y, dtype=float))
    folds = stratified_folds(y, k, seed)
    return evaluate_folds(X, y, folds, C=C, max_epochs=max_epochs, tol=tol)


def one_way_anova(groups: list[np.ndarray]) -> tuple[float, float]:
    """F statistic and p-value with explicit degenerate-case handling.

    Zero between-group variance gives (0, 1); zero within-group variance
    with distinct means gives (inf, 0).
    """
    from scipy import stats

    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    all_vals = np.concatenate(groups)
    grand = np.mean(all_vals)
    ss_between = sum(len(g) * (np.mean(g) - grand) ** 2 for g in groups)
    ss_within = sum(float(np.sum((g - np.mean(g)) ** 2)) for g in groups)
    df_between = len(groups) - 1
    df_within = len(all_vals) - len(groups)
    if ss_between <= 1e-30:
        return 0.0, 1.0
    if ss_within <= 1e-30:
        return float("inf"), 0.0
    f = (ss_between / df_between) / (ss_within / df_within)
    p = float(stats.f.sf(f, df_between, df_within))
    return float(f), p


@dataclass
class WindowStudyResult:
    per_length: dict[int, CVResult]
    f_value: float
    p_value: float
    recommended_length: int


def window_length_study(
    datasets: dict[int, tuple[np.ndarray, np.ndarray]],
    k: int = 7,
    seed: int = 0,
    C: float = 1.0,
) -> WindowStudyResult:
    """Compare CV accuracy across EEG window lengths (seconds).

    Recommends the shortest length whose fold accuracies are statistically
    indistinguishable (two-sample t-test, p > 0.05) from the best length.
    """
    from scipy import stats

    per_length = {
        length: cross_validate(X, y, k=k, seed=seed, C=C)
        for length, (X, y) in datasets.items()
    }
    lengths = sorted(per_length)
    f_value, p_value = one_way_anova(
        [per_length[L].fold_accuracies for L in lengths]
    )
    best = max(lengths, key=lambda L: per_length[L].mean)
    recommended = best
    for length in lengths:
        if length == best:
            recommended = length
            break
        a = per_length[length].fold_accuracies
        b = per_length[best].fold_accuracies
        if np.ptp(np.concatenate([a, b])) <= 1e-12:
            recommended = length
            break
        t_p = stats.ttest_ind(a, b, equal_var=False).pvalue
        if np.isnan(t_p) or t_p > 0.05:
            recommended = length
            break
    return WindowStudyResult(
        per_length=per_length,
        f_value=f_value,
        p_value=p_value,
        recommended_length=recommended,
    )
