"""Music feature extraction and the three-stage feature reduction.

Per-frame features (555 dims, fixed layout):

    zcr(1) | bandwidth p=2,3,4 (3) | mel(128) | mfcc(13) | chroma(12) |
    rms(1) | centroid(1) | contrast(7) | flatness(1) |
    rolloff 5/10/85/95% (4) | tempogram(384)

STFT grid: 44100 Hz audio, 2048-sample Hann window, 512-sample hop, no
centering.  Aggregation emits mean, std and max per dim as three 555-long
blocks, 1665 values total.  An epsilon floor of 1e-10 keeps log- and
ratio-based features defined on digital silence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .errors import DimensionMismatchError, InputTooShortError, InsufficientDataError

SAMPLE_RATE = 44100
FRAME_LENGTH = 2048
HOP_LENGTH = 512
EPS = 1e-10

N_MEL = 128
N_MFCC = 13
N_CHROMA = 12
N_CONTRAST_BANDS = 7
ROLLOFF_PERCENTS = (0.05, 0.10, 0.85, 0.95)
N_TEMPO_LAGS = 384
CONTRAST_EDGES = (0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0, SAMPLE_RATE / 2)
CONTRAST_QUANTILE = 0.02

FRAME_FEATURE_LAYOUT = (
    ("zcr", 1),
    ("bandwidth", 3),
    ("mel", N_MEL),
    ("mfcc", N_MFCC),
    ("chroma", N_CHROMA),
    ("rms", 1),
    ("centroid", 1),
    ("contrast", N_CONTRAST_BANDS),
    ("flatness", 1),
    ("rolloff", len(ROLLOFF_PERCENTS)),
    ("tempogram", N_TEMPO_LAGS),
)
FRAME_DIM = sum(n for _, n in FRAME_FEATURE_LAYOUT)
AGG_STATS = ("mean", "std", "max")
MUSIC_FEATURE_DIM = len(AGG_STATS) * FRAME_DIM

assert FRAME_DIM == 555
assert MUSIC_FEATURE_DIM == 1665


def feature_slices() -> dict[str, slice]:
    """Name -> column slice into the 555-dim frame layout."""
    out, start = {}, 0
    for name, n in FRAME_FEATURE_LAYOUT:
        out[name] = slice(start, start + n)
        start += n
    return out


@dataclass
class FrameFeatureMatrix:
    values: np.ndarray  # (n_frames, 555)
    sample_rate: int = SAMPLE_RATE
    frame_length: int = FRAME_LENGTH
    hop_length: int = HOP_LENGTH

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != FRAME_DIM:
            raise DimensionMismatchError(
                f"frame feature matrix must be (frames, {FRAME_DIM}), "
                f"got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise DimensionMismatchError("non-finite frame feature values")


def _frame(audio: np.ndarray) -> np.ndarray:
    n_frames = 1 + (audio.shape[0] - FRAME_LENGTH) // HOP_LENGTH
    idx = np.arange(FRAME_LENGTH)[None, :] + HOP_LENGTH * np.arange(n_frames)[:, None]
    return audio[idx]


def _mel_filterbank(n_fft_bins: int) -> np.ndarray:
    def hz_to_mel(f):
        return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)

    def mel_to_hz(m):
        return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)

    freqs = np.linspace(0, SAMPLE_RATE / 2, n_fft_bins)
    mel_pts = mel_to_hz(np.linspace(0.0, hz_to_mel(SAMPLE_RATE / 2), N_MEL + 2))
    fb = np.zeros((N_MEL, n_fft_bins))
    for i in range(N_MEL):
        lo, mid, hi = mel_pts[i], mel_pts[i + 1], mel_pts[i + 2]
        up = (freqs - lo) / max(mid - lo, EPS)
        down = (hi - freqs) / max(hi - mid, EPS)
        fb[i] = np.maximum(0.0, np.minimum(up, down))
    return fb


def _chroma_map(freqs: np.ndarray) -> np.ndarray:
    """STFT bin -> pitch-class fold matrix (12, n_bins); bin 0 unassigned."""
    fold = np.zeros((N_CHROMA, freqs.shape[0]))
    with np.errstate(divide="ignore"):
        midi = 69.0 + 12.0 * np.log2(freqs / 440.0)
    for b in range(1, freqs.shape[0]):
        pc = int(np.round(midi[b])) % 12
        fold[pc, b] = 1.0
    return fold


def _tempogram(onset_env: np.ndarray) -> np.ndarray:
    """Per-frame windowed autocorrelation of the onset envelope (384 lags)."""
    w = N_TEMPO_LAGS
    padded = np.concatenate([np.zeros(w // 2), onset_env, np.zeros(w - w // 2)])
    n_frames = onset_env.shape[0]
    segs = np.stack([padded[t : t + w] for t in range(n_frames)])
    spec = np.fft.rfft(segs, n=2 * w, axis=1)
    ac = np.fft.irfft(np.abs(spec) ** 2, axis=1)[:, :w]
    return ac / np.maximum(ac[:, :1], EPS)


def extract_frame_features(
    audio: np.ndarray, sample_rate: int = SAMPLE_RATE
) -> FrameFeatureMatrix:
    audio = np.asarray(audio, dtype=float).ravel()
    if sample_rate != SAMPLE_RATE:
        raise DimensionMismatchError(
            f"expected {SAMPLE_RATE} Hz audio; resample upstream ({sample_rate})"
        )
    if audio.shape[0] < FRAME_LENGTH:
        raise InputTooShortError(
            f"audio shorter than one {FRAME_LENGTH}-sample analysis window"
        )
    frames = _frame(audio)
    n_frames = frames.shape[0]

    # Time-domain features on raw frames.
    crossings = np.abs(np.diff(np.signbit(frames), axis=1)).sum(axis=1)
    zcr = crossings / FRAME_LENGTH
    rms = np.sqrt(np.mean(frames**2, axis=1))

    # Spectral features on Hann-windowed frames.
    window = np.hanning(FRAME_LENGTH)
    spectrum = np.abs(np.fft.rfft(frames * window, axis=1))
    power = spectrum**2
    mag = spectrum + EPS
    freqs = np.fft.rfftfreq(FRAME_LENGTH, 1.0 / SAMPLE_RATE)
    n_bins = freqs.shape[0]

    mag_sum = mag.sum(axis=1)
    centroid = (mag * freqs).sum(axis=1) / mag_sum
    bandwidth = np.stack(
        [
            ((mag * np.abs(freqs[None, :] - centroid[:, None]) ** p).sum(axis=1) / mag_sum)
            ** (1.0 / p)
            for p in (2, 3, 4)
        ],
        axis=1,
    )

    mel_fb = _mel_filterbank(n_bins)
    mel = power @ mel_fb.T
    log_mel = np.log(mel + EPS)
    mfcc = dct(log_mel, type=2, norm="ortho", axis=1)[:, :N_MFCC]

    chroma = power @ _chroma_map(freqs).T
    chroma = chroma / np.maximum(chroma.max(axis=1, keepdims=True), EPS)

    peeps = power + EPS
    flatness = np.exp(np.mean(np.log(peeps), axis=1)) / np.mean(peeps, axis=1)

    cum = np.cumsum(peeps, axis=1)
    total = cum[:, -1]
    rolloff = np.stack(
        [
            freqs[np.argmax(cum >= pct * total[:, None], axis=1)]
            for pct in ROLLOFF_PERCENTS
        ],
        axis=1,
    )

    contrast = np.empty((n_frames, N_CONTRAST_BANDS))
    for b in range(N_CONTRAST_BANDS):
        lo, hi = CONTRAST_EDGES[b], CONTRAST_EDGES[b + 1]
        mask = (freqs >= lo) & (freqs < hi) if b < N_CONTRAST_BANDS - 1 else (
            (freqs >= lo) & (freqs <= hi)
        )
        sub = np.sort(mag[:, mask], axis=1)
        k = max(1, int(CONTRAST_QUANTILE * sub.shape[1]))
        valley = sub[:, :k].mean(axis=1)
        peak = sub[:, -k:].mean(axis=1)
        contrast[:, b] = np.log(peak + EPS) - np.log(valley + EPS)

    onset = np.maximum(np.diff(log_mel, axis=0, prepend=log_mel[:1]), 0.0).sum(axis=1)
    tempogram = _tempogram(onset)

    values = np.concatenate(
        [
            zcr[:, None],
            bandwidth,
            mel,
            mfcc,
            chroma,
            rms[:, None],
            centroid[:, None],
            contrast,
            flatness[:, None],
            rolloff,
            tempogram,
        ],
        axis=1,
    )
    assert values.shape == (n_frames, FRAME_DIM)
    return FrameFeatureMatrix(values=values)


def aggregate_features(m: FrameFeatureMatrix) -> np.ndarray:
    """Mean/std/max per dim, concatenated as three 555-long blocks."""
    v = m.values
    out = np.concatenate([v.mean(axis=0), v.std(axis=0), v.max(axis=0)])
    assert out.shape[0] == MUSIC_FEATURE_DIM
    return out


def extract_music_features(audio: np.ndarray, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    return aggregate_features(extract_frame_features(audio, sample_rate))


@dataclass
class ReductionReport:
    kept_indices: list[int]
    dropped_constant: list[int]
    dropped_quasi_constant: list[int]
    dropped_correlated: list[int]

    def partition_ok(self, n_dims: int) -> bool:
        all_idx = sorted(
            self.kept_indices
            + self.dropped_constant
            + self.dropped_quasi_constant
            + self.dropped_correlated
        )
        return all_idx == list(range(n_dims))


def _significant_buckets(x: np.ndarray) -> np.ndarray:
    """Bucket values to 6 significant digits (decimal, exact)."""
    return np.array([f"{v:.6g}" for v in np.asarray(x, dtype=float)])


def reduce_features(
    matrix: np.ndarray,
    quasi_constant_threshold: float = 0.90,
    correlation_threshold: float = 0.92,
) -> ReductionReport:
    """Three-stage filter: constants, quasi-constants, correlated dims.

    Stage 2 buckets values to 6 significant digits before computing the
    mode frequency.  Stage 3 scans surviving dims in ascending index
    order, keeping a dim only if its |Pearson r| with every already-kept
    dim stays at or below the threshold.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise InsufficientDataError("reduction needs >= 2 feature vectors")
    n_songs, d = matrix.shape

    constant, quasi, remaining = [], [], []
    for j in range(d):
        col = matrix[:, j]
        if np.all(col == col[0]):
            constant.append(j)
            continue
        _, counts = np.unique(_significant_buckets(col), return_counts=True)
        if counts.max() / n_songs >= quasi_constant_threshold:
            quasi.append(j)
        else:
            remaining.append(j)

    kept: list[int] = []
    kept_pos: list[int] = []
    correlated: list[int] = []
    if remaining:
        sub = matrix[:, remaining]
        corr = np.atleast_2d(np.corrcoef(sub, rowvar=False))
        for pos, j in enumerate(remaining):
            if kept_pos and np.any(
                np.abs(corr[pos, kept_pos]) > correlation_threshold
            ):
                correlated.append(j)
            else:
                kept.append(j)
                kept_pos.append(pos)
    return ReductionReport(
        kept_indices=kept,
        dropped_constant=constant,
        dropped_quasi_constant=quasi,
        dropped_correlated=correlated,
    )


@dataclass
class NormStats:
    """Per-dimension normalization parameters, persisted with the model.

    ``minmax`` maps the training range to [0, 1]; ``zscore`` centers and
    scales by the training std.  Either way, transformed values are
    clamped to [-3, 3] to bound extrapolation on unseen data.
    """

    kind: str  # "minmax" | "zscore"
    center: np.ndarray  # min or mean
    scale: np.ndarray  # range or std (zeros pass through as 0)
    clamp: float = 3.0

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.center.shape[0]:
            raise DimensionMismatchError(
                f"expected {self.center.shape[0]} dims, got {X.shape[-1]}"
            )
        safe = np.where(self.scale > 0, self.scale, 1.0)
        out = (X - self.center) / safe
        out = np.where(self.scale > 0, out, 0.0)
        return np.clip(out, -self.clamp, self.clamp)


def fit_normalization(matrix: np.ndarray, kind: str = "minmax") -> tuple[np.ndarray, NormStats]:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise InsufficientDataError("normalization needs >= 2 feature vectors")
    if kind == "minmax":
        lo = matrix.min(axis=0)
        scale = matrix.max(axis=0) - lo
        stats = NormStats(kind="minmax", center=lo, scale=scale)
    elif kind == "zscore":
        mu = matrix.mean(axis=0)
        sd = matrix.std(axis=0)
        stats = NormStats(kind="zscore", center=mu, scale=sd)
    else:
        raise ValueError(f"unknown normalization kind {kind!r}")
    return stats.transform(matrix), stats
