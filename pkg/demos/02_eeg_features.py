"""Walk a synthetic EEG recording through the full preprocessing chain:
band-pass filter, channel and artifact rejection, band powers, and the
40-dim asymmetry feature vector.
"""

import numpy as np

from moodloop import eeg, simulate

rng = np.random.default_rng(1)
recording = simulate.make_eeg_recording(rng, seconds=10.0)
print(f"recording: {len(recording.channels)} channels, {recording.duration:.0f} s")

filtered = eeg.bandpass_filter(recording)
clean = eeg.reject_channels(filtered)
print(f"rejected channels: {sorted(clean.rejected_channels) or 'none'}")

windows = eeg.reject_artifacts(clean, window_length=2)
total = clean.kept_data().shape[1] // (2 * clean.sample_rate)
print(f"windows: {total} total, {len(windows)} kept after artifact check")

bp = eeg.band_powers(windows[0], clean.kept_channels, window_length=2)
print(f"mean alpha power {bp.powers[:, 0].mean():.3f}, "
      f"mean gamma power {bp.powers[:, 3].mean():.3f}")

features = eeg.features_from_recording(recording, window_length=2)
print(f"feature vector: {features.shape[0]} dims "
      "(16 asymmetry + 16 temporal + 8 global)")

two_ch = eeg.features_from_recording(recording, window_length=2, two_channel=True)
print(f"two-channel (T7/T8) variant: {two_ch.shape[0]} dims")
