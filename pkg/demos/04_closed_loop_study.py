"""Reproduce the headline closed-loop result end to end: two days of
training, a testing phase, a multi-day real-life phase, and the
emotional-instability scores derived from repeated songs.
"""

import numpy as np

from moodloop import engine, simulate
from moodloop.pipeline import train_user_model

library, responder, rng = simulate.make_closed_loop_scenario()
config = simulate.SimulationConfig()

trials = simulate.run_training_phase(library, responder, config, rng)
songs = {s.song_id: s for s in library}
model = train_user_model("study-user", trials, songs, config.train)
print(f"trained on {len(trials)} trials "
      f"(valence CV {model.valence.cv.mean:.3f}, "
      f"arousal CV {model.arousal.cv.mean:.3f})")

testing = simulate.run_testing_phase(
    model, library, responder, config.testing_trials, rng, config
)
print(f"testing match rate over {len(testing)} trials: "
      f"{engine.match_rate(testing):.3f}")

baseline = simulate.run_random_policy(library, responder, 100, rng)
print(f"random-pick baseline: {engine.match_rate(baseline):.3f}")

reports, model = simulate.run_real_life_phase(
    model, library, responder, songs, list(trials), 3, rng, config,
    retrain_each_day=False,
)
print()
print(simulate.report_csv(reports).strip())

last = reports[-1]
print()
print(f"instability t-scores: valence {last.t_valence:.3f}, "
      f"arousal {last.t_arousal:.3f}")
rewritten = engine.rewrite_neuroticism(62.0)
print(f"example neuroticism 62% rewritten to {rewritten:.2f} for correlation")
