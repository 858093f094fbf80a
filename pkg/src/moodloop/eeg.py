"""EEG processing: filtering, rejection, band powers and the 40-dim vector.

The headset layout is the 14-channel Emotiv EPOC+ montage sampled at
128 Hz.  Band edges follow the extraction grouping (8-12, 12-16, 16-32,
32-48 Hz); a boundary frequency belongs to the lower band, and content
in (48, 49] is discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import signal as sps
from scipy import stats as spstats

from .errors import (
    InputTooShortError,
    InsufficientDataError,
    MissingChannelError,
    NoCleanDataError,
    RecordingUnusableError,
    WindowSizeError,
)

EMOTIV_CHANNELS = (
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
    "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
)
SAMPLE_RATE = 128

BAND_NAMES = ("alpha", "beta1", "beta2", "gamma")
BAND_EDGES = ((8.0, 12.0), (12.0, 16.0), (16.0, 32.0), (32.0, 48.0))

ASYMMETRY_PAIRS = (("AF4", "AF3"), ("F8", "F7"), ("F4", "F3"), ("FC6", "FC5"))
TEMPORAL_CHANNELS = ("T7", "T8", "P7", "P8")

# Spectrum smoothing: moving-average points per window length in seconds.
SMOOTHING_POINTS = {10: 3, 5: 2, 2: 1}

EEG_FEATURE_DIM = 40
EEG_FEATURE_DIM_2CH = 8

CHANNEL_REJECT_THRESHOLD = 20.0
ARTIFACT_POWER_FACTOR = 5.0


@dataclass(frozen=True)
class EEGRecording:
    channels: tuple[str, ...]
    data: np.ndarray  # (n_channels, n_samples)
    sample_rate: int = SAMPLE_RATE
    rejected_channels: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        if data.ndim != 2 or data.shape[0] != len(self.channels):
            raise WindowSizeError(
                f"data shape {data.shape} does not match {len(self.channels)} channels"
            )
        unknown = [c for c in self.channels if c not in EMOTIV_CHANNELS]
        if unknown:
            raise MissingChannelError(unknown[0])

    @property
    def kept_channels(self) -> tuple[str, ...]:
        return tuple(c for c in self.channels if c not in self.rejected_channels)

    def kept_data(self) -> np.ndarray:
        keep = [i for i, c in enumerate(self.channels) if c not in self.rejected_channels]
        return self.data[keep]

    @property
    def duration(self) -> float:
        return self.data.shape[1] / self.sample_rate


def bandpass_filter(rec: EEGRecording) -> EEGRecording:
    """Zero-phase 8 Hz high-pass then 49 Hz low-pass (Butterworth, SOS).

    8th-order sections applied forward-backward: the resulting passband
    keeps >= 90% of a 10 Hz tone's power while blink-band (~3 Hz)
    content is attenuated far below 1%.
    """
    if rec.data.shape[1] < rec.sample_rate:
        raise InputTooShortError("need at least 1 s of EEG for filtering")
    nyq = rec.sample_rate / 2.0
    hp = sps.butter(8, 8.0 / nyq, btype="highpass", output="sos")
    lp = sps.butter(8, 49.0 / nyq, btype="lowpass", output="sos")
    out = sps.sosfiltfilt(hp, rec.data, axis=1)
    out = sps.sosfiltfilt(lp, out, axis=1)
    return replace(rec, data=np.ascontiguousarray(out))


def channel_measures(rec: EEGRecording) -> np.ndarray:
    """Robust-z-scored kurtosis per channel (stand-in deviation measure)."""
    k = spstats.kurtosis(rec.data, axis=1, fisher=True, bias=True)
    med = np.median(k)
    mad = np.median(np.abs(k - med))
    scale = max(1.4826 * mad, 0.05)
    return np.abs(k - med) / scale


def reject_channels(rec: EEGRecording) -> EEGRecording:
    """Flag channels whose deviation measure exceeds the threshold (20)."""
    measures = channel_measures(rec)
    bad = {c for c, m in zip(rec.channels, measures) if m > CHANNEL_REJECT_THRESHOLD}
    rejected = frozenset(rec.rejected_channels | bad)
    if len(rejected) > 7:
        raise RecordingUnusableError(
            f"{len(rejected)} of {len(rec.channels)} channels rejected"
        )
    return replace(rec, rejected_channels=rejected)


def _window_band_power(window: np.ndarray, sample_rate: int) -> np.ndarray:
    """Total 8-48 Hz power per channel of one window."""
    n = window.shape[1]
    spec = np.abs(np.fft.rfft(window, axis=1)) ** 2 / n
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    mask = (freqs >= BAND_EDGES[0][0]) & (freqs <= BAND_EDGES[-1][1])
    return spec[:, mask].sum(axis=1)


def reject_artifacts(rec: EEGRecording, window_length: int) -> list[np.ndarray]:
    """Split into fixed windows and drop those with a band-power burst.

    A window is rejected when any kept channel's 8-48 Hz power exceeds
    5x that channel's median power across windows.
    """
    data = rec.kept_data()
    win = window_length * rec.sample_rate
    n_windows = data.shape[1] // win
    if n_windows == 0:
        raise InputTooShortError(
            f"recording shorter than one {window_length} s window"
        )
    windows = [data[:, i * win : (i + 1) * win] for i in range(n_windows)]
    powers = np.stack([_window_band_power(w, rec.sample_rate) for w in windows])
    median = np.median(powers, axis=0)
    floor = np.maximum(median, 1e-30)
    clean = [
        w for w, p in zip(windows, powers)
        if not np.any(p > ARTIFACT_POWER_FACTOR * floor)
    ]
    if not clean:
        raise NoCleanDataError("every window was flagged as artifact")
    return clean


@dataclass(frozen=True)
class BandPowerTable:
    """Per-channel power in the four extraction bands."""

    channels: tuple[str, ...]
    powers: np.ndarray  # (n_channels, 4)
    window_length: int

    def power(self, channel: str) -> np.ndarray:
        try:
            return self.powers[self.channels.index(channel)]
        except ValueError:
            raise MissingChannelError(channel) from None


def band_powers(
    window: np.ndarray,
    channels: Sequence[str],
    window_length: int,
    sample_rate: int = SAMPLE_RATE,
) -> BandPowerTable:
    """Magnitude-squared FFT per channel, smoothed, summed into 4 bands.

    FFT length equals the window sample count (rectangular window, no
    zero padding); the spectrum is smoothed by a centered moving average
    of 3/2/1 points for 10/5/2 s windows.
    """
    if window_length not in SMOOTHING_POINTS:
        raise WindowSizeError(f"window_length must be one of {sorted(SMOOTHING_POINTS)}")
    window = np.atleast_2d(np.asarray(window, dtype=float))
    expected = window_length * sample_rate
    if window.shape[1] != expected:
        raise WindowSizeError(
            f"expected {expected} samples per channel, got {window.shape[1]}"
        )
    if window.shape[0] != len(channels):
        raise WindowSizeError("channel count does not match window rows")
    n = window.shape[1]
    spec = np.abs(np.fft.rfft(window, axis=1)) ** 2 / n
    m = SMOOTHING_POINTS[window_length]
    if m > 1:
        kernel = np.ones(m) / m
        spec = np.apply_along_axis(
            lambda s: np.convolve(s, kernel, mode="same"), 1, spec
        )
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    powers = np.zeros((window.shape[0], len(BAND_EDGES)))
    for b, (lo, hi) in enumerate(BAND_EDGES):
        if b == 0:
            mask = (freqs >= lo) & (freqs <= hi)
        else:
            mask = (freqs > lo) & (freqs <= hi)
        powers[:, b] = spec[:, mask].sum(axis=1)
    return BandPowerTable(
        channels=tuple(channels), powers=powers, window_length=window_length
    )


def eeg_feature_vector(bp: BandPowerTable) -> np.ndarray:
    """The 40-dim feature vector: 16 asymmetry + 16 temporal + 8 global.

    Layout (documented order):
      [0:16]   right-left band-power differences for the pairs
               AF4/AF3, F8/F7, F4/F3, FC6/FC5 (pair-major, band-minor)
      [16:32]  band powers of T7, T8, P7, P8 (channel-major, band-minor)
      [32:36]  mean of all kept channels' power per band
      [36:40]  std of all kept channels' power per band
    """
    feats = []
    for right, left in ASYMMETRY_PAIRS:
        feats.append(bp.power(right) - bp.power(left))
    for ch in TEMPORAL_CHANNELS:
        feats.append(bp.power(ch))
    feats.append(bp.powers.mean(axis=0))
    feats.append(bp.powers.std(axis=0))
    vec = np.concatenate(feats)
    assert vec.shape[0] == EEG_FEATURE_DIM
    return vec


def eeg_feature_vector_2ch(bp: BandPowerTable) -> np.ndarray:
    """Two-channel (T7/T8) variant: 8 band-power features."""
    vec = np.concatenate([bp.power("T7"), bp.power("T8")])
    assert vec.shape[0] == EEG_FEATURE_DIM_2CH
    return vec


def features_from_recording(
    rec: EEGRecording, window_length: int = 2, two_channel: bool = False
) -> np.ndarray:
    """Full pipeline for one recording; features averaged over clean windows."""
    filtered = bandpass_filter(rec)
    filtered = reject_channels(filtered)
    extract = eeg_feature_vector_2ch if two_channel else eeg_feature_vector
    vecs = []
    for window in reject_artifacts(filtered, window_length):
        bp = band_powers(
            window, filtered.kept_channels, window_length, rec.sample_rate
        )
        vecs.append(extract(bp))
    return np.mean(vecs, axis=0)


@dataclass
class VarianceAnalysis:
    intra_variance: np.ndarray  # per-feature mean variance within experiments
    inter_variance: np.ndarray  # per-feature mean variance across experiment seams
    lower_intra: np.ndarray  # boolean per feature
    fraction_lower: float


def variance_analysis(experiments: Sequence[np.ndarray]) -> VarianceAnalysis:
    """Compare per-feature variance within vs. across consecutive experiments.

    The inter-experiment sample for a seam combines the tail half of one
    experiment with the head half of the next, matching the intra sample
    size.
    """
    mats = [np.atleast_2d(np.asarray(e, dtype=float)) for e in experiments]
    if len(mats) < 2 or any(m.shape[0] < 2 for m in mats):
        raise InsufficientDataError(
            "need >= 2 experiments with >= 2 trials each"
        )
    intra = np.mean([m.var(axis=0, ddof=1) for m in mats], axis=0)
    seams = []
    for a, b in zip(mats, mats[1:]):
        tail = a[a.shape[0] // 2 :]
        head = b[: (b.shape[0] + 1) // 2]
        seams.append(np.vstack([tail, head]).var(axis=0, ddof=1))
    inter = np.mean(seams, axis=0)
    lower = intra < inter
    return VarianceAnalysis(
        intra_variance=intra,
        inter_variance=inter,
        lower_intra=lower,
        fraction_lower=float(np.mean(lower)),
    )
