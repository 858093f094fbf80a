"""Command-line entry points for the batch pipelines and the service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import audio, eeg as eeg_mod, engine, selection, simulate, store, svm
from .core import SongRecord, axis_labels
from .errors import MoodloopError
from .pipeline import TrainConfig, train_user_model


def _load_config(path: str | None) -> TrainConfig:
    if path is None:
        return TrainConfig()
    return TrainConfig(**json.loads(Path(path).read_text()))


def _library_with_features(
    manifest_path: str, cache_path: str
) -> list[SongRecord]:
    songs = store.load_song_manifest(manifest_path)
    cache = store.load_feature_cache(cache_path)
    out = []
    for s in songs:
        vec = cache.get(s.song_id)
        if vec is None:
            raise click.ClickException(f"no cached features for {s.song_id}")
        out.append(s.with_features(vec))
    return out


@click.group()
def main():
    """EEG-conditioned music emotion-regulation toolkit."""


@main.command("extract-music")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def cli_extract_music(manifest, out_path):
    """Extract and cache the 1665-dim feature vector for every song."""
    from scipy.io import wavfile

    songs = store.load_song_manifest(manifest)
    cache = (
        store.load_feature_cache(out_path)
        if Path(out_path).exists()
        else store.new_feature_cache()
    )
    failures = []
    extracted = 0
    for song in songs:
        try:
            digest = store.audio_content_hash(song.audio_path)
        except OSError as exc:
            failures.append((song.song_id, str(exc)))
            continue
        if cache.get(song.song_id, digest) is not None:
            continue
        try:
            rate, raw = wavfile.read(song.audio_path)
            data = np.asarray(raw, dtype=float)
            if data.ndim == 2:
                data = data.mean(axis=1)
            if np.issubdtype(raw.dtype, np.integer):
                data = data / float(np.iinfo(raw.dtype).max + 1)
            vec = audio.extract_music_features(data, rate)
        except (MoodloopError, ValueError, OSError) as exc:
            failures.append((song.song_id, str(exc)))
            continue
        cache.put(song.song_id, digest, vec)
        extracted += 1
    store.save_feature_cache(cache, out_path)
    click.echo(f"extracted {extracted}, cached total {len(cache.entries)}")
    for song_id, err in failures:
        click.echo(f"FAILED {song_id}: {err}", err=True)
    if failures:
        sys.exit(1)


@main.command("extract-eeg")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--window-length", default=2, type=click.Choice(["10", "5", "2"]), show_default=True)
@click.option("--two-channel", is_flag=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def cli_extract_eeg(input_path, window_length, two_channel, out_path):
    """Turn an EEG CSV recording into its feature vector."""
    rec = store.load_eeg_csv(input_path)
    feats = eeg_mod.features_from_recording(
        rec, window_length=int(window_length), two_channel=two_channel
    )
    Path(out_path).write_text(
        json.dumps({"features": [float(v) for v in feats]}, sort_keys=True)
    )
    click.echo(f"wrote {feats.shape[0]}-dim feature vector to {out_path}")


@main.command("reduce")
@click.option("--cache", "cache_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def cli_reduce(cache_path, out_path):
    """Run the three-stage feature reduction over cached song features."""
    cache = store.load_feature_cache(cache_path)
    if len(cache.entries) < 2:
        raise click.ClickException("need at least 2 cached songs")
    ids = sorted(cache.entries)
    matrix = np.stack([cache.get(i) for i in ids])
    report = audio.reduce_features(matrix)
    Path(out_path).write_text(
        json.dumps(
            {
                "kept_indices": report.kept_indices,
                "dropped_constant": report.dropped_constant,
                "dropped_quasi_constant": report.dropped_quasi_constant,
                "dropped_correlated": report.dropped_correlated,
            },
            sort_keys=True,
        )
    )
    click.echo(f"kept {len(report.kept_indices)} of {matrix.shape[1]} dims")


@main.command("select")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--cache", "cache_path", required=True, type=click.Path(exists=True))
@click.option("--axis", type=click.Choice(["valence", "arousal"]), default="valence")
@click.option("--target", default=50, show_default=True)
@click.option("--seed", default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
def cli_select(manifest, cache_path, axis, target, seed, out_path):
    """Annotation-driven SBS over the reduced music feature space."""
    songs = _library_with_features(manifest, cache_path)
    matrix = np.stack([s.feature_vector for s in songs])
    report = audio.reduce_features(matrix)
    reduced, stats = audio.fit_normalization(matrix[:, report.kept_indices])
    idx = 0 if axis == "valence" else 1
    y = np.array([1.0 if s.rescaled_annotation[idx] > 0 else -1.0 for s in songs])
    result = selection.sbs(
        reduced, y, target_k=min(target, reduced.shape[1]), seed=seed,
        cv_folds=min(7, len(songs) // 2),
    )
    Path(out_path).write_text(
        json.dumps(
            {
                "axis": axis,
                "reduced_kept": report.kept_indices,
                "selected_indices": result.selected_indices,
                "final_score": result.final_score,
            },
            sort_keys=True,
        )
    )
    click.echo(
        f"{axis}: selected {len(result.selected_indices)} dims, "
        f"CV accuracy {result.final_score:.3f}"
    )


@main.command("train")
@click.option("--user", "user_id", required=True)
@click.option("--trials", "trials_path", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--cache", "cache_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def cli_train(user_id, trials_path, manifest, cache_path, config_path, out_path):
    """Reduction -> SBS -> SVM for both models; writes the bundle + CV report."""
    trials = store.load_session_log(trials_path)
    songs = {s.song_id: s for s in _library_with_features(manifest, cache_path)}
    config = _load_config(config_path)
    try:
        model = train_user_model(user_id, trials, songs, config)
    except MoodloopError as exc:
        raise click.ClickException(str(exc)) from None
    store.save_model_bundle(model, out_path)
    for axis in ("valence", "arousal"):
        cv = model.axis(axis).cv
        folds = " ".join(f"{a:.3f}" for a in cv.fold_accuracies)
        n_eeg, n_music = model.selection_profile(axis)
        click.echo(
            f"{axis}: CV {cv.mean:.3f} +/- {cv.std:.3f} [{folds}] "
            f"(features: {n_eeg} EEG + {n_music} music)"
        )


@main.command("cross-validate")
@click.option("--trials", "trials_path", required=True, type=click.Path(exists=True))
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--cache", "cache_path", required=True, type=click.Path(exists=True))
def cli_cross_validate(trials_path, bundle_path, manifest, cache_path):
    """Re-run 7-fold CV of a trained bundle on a trial log."""
    trials = store.load_session_log(trials_path)
    model = store.load_model_bundle(bundle_path)
    songs = {s.song_id: s for s in _library_with_features(manifest, cache_path)}
    for axis in ("valence", "arousal"):
        X = np.stack(
            [
                model.combined_vector(
                    t.eeg_features, songs[t.song_id].feature_vector, axis
                )
                for t in trials
            ]
        )
        v_labels, a_labels = axis_labels([t.evaluated_score for t in trials])
        y = v_labels if axis == "valence" else a_labels
        cv = svm.cross_validate(
            X, y, k=model.config.cv_folds, seed=model.config.seed, C=model.config.svm_C
        )
        click.echo(f"{axis}: CV {cv.mean:.3f} +/- {cv.std:.3f}")


@main.command("window-study")
@click.option("--trials", "trials_dir", required=True, type=click.Path(exists=True),
              help="Directory of per-trial EEG CSVs named <trial_id>.csv")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0)
def cli_window_study(trials_dir, log_path, seed):
    """Compare 10/5/2 s EEG windows by CV accuracy (arousal labels)."""
    trials = store.load_session_log(log_path)
    datasets = {}
    _, a_labels = axis_labels([t.evaluated_score for t in trials])
    for length in (10, 5, 2):
        feats = []
        for t in trials:
            rec = store.load_eeg_csv(Path(trials_dir) / f"{t.trial_id}.csv")
            feats.append(eeg_mod.features_from_recording(rec, window_length=length))
        datasets[length] = (np.stack(feats), a_labels)
    result = svm.window_length_study(datasets, seed=seed)
    for length in sorted(result.per_length):
        cv = result.per_length[length]
        click.echo(f"{length:>2} s: CV {cv.mean:.3f} +/- {cv.std:.3f}")
    click.echo(
        f"F = {result.f_value:.3f}, p = {result.p_value:.3f}; "
        f"recommended window: {result.recommended_length} s"
    )


@main.command("simulate")
@click.option("--days", default=5, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--responder", "responder_path", type=click.Path(exists=True),
              help="JSON responder config: {seed, n_songs, n_active_dims, eeg_coupling}")
def cli_simulate(days, seed, out_path, responder_path):
    """Closed-loop multi-day simulation; writes a per-day CSV report."""
    kwargs = {}
    if responder_path:
        kwargs = json.loads(Path(responder_path).read_text())
    library, responder, rng = simulate.make_closed_loop_scenario(
        seed=kwargs.pop("seed", seed), **kwargs
    )
    cfg = simulate.SimulationConfig(
        training_days=2, train=TrainConfig(seed=seed, final_target=15)
    )
    trials = simulate.run_training_phase(library, responder, cfg, rng)
    songs = {s.song_id: s for s in library}
    model = train_user_model("sim", trials, songs, cfg.train)
    reports, _ = simulate.run_real_life_phase(
        model, library, responder, songs, trials, days, rng, cfg,
        retrain_each_day=False,
    )
    Path(out_path).write_text(simulate.report_csv(reports))
    click.echo(f"wrote {len(reports)} day rows to {out_path}")


@main.command("instability")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--neuroticism", type=float, default=None,
              help="Big-5 neuroticism percentile (0-100) for this user")
def cli_instability(log_path, neuroticism):
    """t-scores (and the rewritten Big-5 value) from a session log."""
    trials = store.load_session_log(log_path)
    try:
        t_v, t_a = engine.instability_scores(trials)
    except MoodloopError as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(f"t_valence = {t_v:.4f}")
    click.echo(f"t_arousal = {t_a:.4f}")
    if neuroticism is not None:
        click.echo(
            f"neuroticism rewritten = {engine.rewrite_neuroticism(neuroticism):.4f}"
        )


@main.command("serve")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--cache", "cache_path", required=True, type=click.Path(exists=True))
@click.option("--log-dir", type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def cli_serve(bundle_path, manifest, cache_path, log_dir, host, port):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    model = store.load_model_bundle(bundle_path)
    library = _library_with_features(manifest, cache_path)
    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
    app = create_app(model, library, log_dir=log_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
