"""Extract the 1665-dim music descriptor from a synthetic clip, then run
the three-stage dimensionality reduction over a small synthetic corpus.
"""

import numpy as np

from moodloop import audio, simulate

rng = np.random.default_rng(0)

# A 3-second clip: two tones plus noise, like a (very boring) song.
t = np.arange(3 * audio.SAMPLE_RATE) / audio.SAMPLE_RATE
clip = np.sin(2 * np.pi * 440 * t) + 0.5 * np.sin(2 * np.pi * 660 * t)
clip += 0.05 * rng.standard_normal(t.shape)

frames = audio.extract_frame_features(clip)
vector = audio.aggregate_features(frames)
print(f"frames: {frames.values.shape[0]} x {frames.values.shape[1]} dims")
print(f"aggregated vector: {vector.shape[0]} dims (mean / std / max blocks)")

slices = audio.feature_slices()
zcr = frames.values[:, slices["zcr"]].mean()
print(f"mean zero-crossing rate: {zcr:.4f} (tone-dominated, so low)")

# Reduction over a synthetic 20-song corpus: constants and near-duplicates
# in the 1665-dim layout get dropped, the informative dims survive.
songs, active = simulate.make_synthetic_library(rng, n_songs=20, n_active_dims=8)
matrix = np.stack([s.feature_vector for s in songs])
report = audio.reduce_features(matrix)
print(f"corpus: {matrix.shape[0]} songs x {matrix.shape[1]} dims")
print(
    f"reduction kept {len(report.kept_indices)} dims "
    f"(dropped {len(report.dropped_constant)} constant, "
    f"{len(report.dropped_quasi_constant)} quasi-constant, "
    f"{len(report.dropped_correlated)} correlated)"
)
