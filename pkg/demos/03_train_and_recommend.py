"""Train a per-user quadrant model on simulated session trials, inspect
the cross-validated accuracy and feature-selection profile, then drive
the recommendation loop for a few testing trials.
"""

from moodloop import engine, simulate
from moodloop.core import Quadrant
from moodloop.pipeline import TrainConfig, train_user_model

library, responder, rng = simulate.make_closed_loop_scenario(seed=42, n_songs=160)
config = simulate.SimulationConfig(
    training_days=1,
    experiments_per_day=4,
    trials_per_quadrant=4,
    train=TrainConfig(final_target=20, cv_folds=5),
)

trials = simulate.run_training_phase(library, responder, config, rng)
print(f"training phase produced {len(trials)} trials")

songs = {s.song_id: s for s in library}
model = train_user_model("demo-user", trials, songs, config.train)
for axis in ("valence", "arousal"):
    cv = model.axis(axis).cv
    n_eeg, n_music = model.selection_profile(axis)
    print(f"{axis}: CV accuracy {cv.mean:.3f} +/- {cv.std:.3f}, "
          f"selected {n_eeg} EEG + {n_music} music dims")

# Closed-loop testing: designate a quadrant, let the engine pick songs.
state = engine.SessionState(user_id="demo-user", phase="testing", seed=7)
for i in range(5):
    target = list(Quadrant)[i % 4]
    feats = simulate.trial_eeg_features(rng, config.window_length)
    state.current_eeg_features = feats
    rec = engine.recommend(target, feats, library, model, state.rng)
    score = responder(feats, rec.song)
    trial = state.log_trial(rec.song, score, designated=target)
    print(f"trial {i + 1}: wanted {target.value}, played {rec.song.song_id} "
          f"(iteration {rec.iteration_count}), evaluated {score.quadrant.value}, "
          f"matched={trial.matched}")

print(f"session match rate: {engine.match_rate(state.trial_log):.2f}")
