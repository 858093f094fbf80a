"""Shared fixtures: a fast small trained model and the full closed-loop run.

Both are session-scoped because model training dominates the suite's
runtime; every test that needs a trained model shares one instance.
"""

from types import SimpleNamespace

import numpy as np
import pytest

from moodloop import simulate
from moodloop.pipeline import TrainConfig, train_user_model


@pytest.fixture(scope="session")
def small_setup():
    """A small library + responder + trained model (seconds, not minutes)."""
    rng = np.random.default_rng(7)
    library, active = simulate.make_synthetic_library(rng, n_songs=48, n_active_dims=8)
    scale = simulate.eeg_feature_scale(np.random.default_rng(8))
    responder = simulate.make_linear_responder(
        rng, library, active, eeg_coupling=0.05, eeg_feature_scale=scale
    )
    library = simulate.margin_filter_library(library, responder)
    config = simulate.SimulationConfig(
        training_days=1,
        experiments_per_day=2,
        trials_per_quadrant=2,
        train=TrainConfig(final_target=10, cv_folds=4),
    )
    trials = simulate.run_training_phase(library, responder, config, rng)
    songs = {s.song_id: s for s in library}
    model = train_user_model("small", trials, songs, config.train)
    return SimpleNamespace(
        rng=rng,
        library=library,
        responder=responder,
        config=config,
        trials=trials,
        songs=songs,
        model=model,
    )


@pytest.fixture(scope="session")
def closed_loop():
    """The full closed-loop scenario: 144 training trials + trained model."""
    library, responder, rng = simulate.make_closed_loop_scenario()
    config = simulate.SimulationConfig()
    trials = simulate.run_training_phase(library, responder, config, rng)
    songs = {s.song_id: s for s in library}
    model = train_user_model("sim", trials, songs, config.train)
    return SimpleNamespace(
        rng=rng,
        library=library,
        responder=responder,
        config=config,
        trials=trials,
        songs=songs,
        model=model,
    )
