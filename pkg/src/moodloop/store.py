"""Persistence: song manifests (CSV), EEG recordings (CSV), feature
caches, model bundles and session logs (JSON lines).

All artifacts are human-inspectable.  Bundles are a single JSON document
with an embedded SHA-256 checksum over the canonical (sorted-key) form;
loading then saving reproduces the byte-identical canonical file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import audio, selection, svm
from .core import GENRES, Quadrant, SongRecord, TrialRecord, VAScore
from .eeg import EMOTIV_CHANNELS, SAMPLE_RATE, EEGRecording
from .errors import BundleFormatError, ChecksumError, EEGParseError, ManifestError
from .pipeline import AxisModel, TrainConfig, TrainedModel

MANIFEST_HEADER = ["song_id", "audio_path", "genre", "valence_raw", "arousal_raw"]
BUNDLE_VERSION = 1
CACHE_VERSION = 1


# --- song manifest -------------------------------------------------------

def load_song_manifest(path: str | Path) -> list[SongRecord]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or rows[0] != MANIFEST_HEADER:
        raise ManifestError(
            f"{path}: expected header {','.join(MANIFEST_HEADER)}"
        )
    songs: list[SongRecord] = []
    seen: dict[str, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(MANIFEST_HEADER):
            raise ManifestError(f"{path}:{lineno}: expected {len(MANIFEST_HEADER)} columns")
        song_id, audio_path, genre, v_raw, a_raw = row
        if song_id in seen:
            raise ManifestError(
                f"{path}:{lineno}: duplicate song_id {song_id!r} "
                f"(first seen on line {seen[song_id]})"
            )
        seen[song_id] = lineno
        if genre not in GENRES:
            raise ManifestError(f"{path}:{lineno}: unknown genre {genre!r}")
        try:
            v = float(v_raw)
            a = float(a_raw)
        except ValueError:
            raise ManifestError(f"{path}:{lineno}: non-numeric annotation") from None
        if not (1.0 <= v <= 9.0 and 1.0 <= a <= 9.0):
            raise ManifestError(
                f"{path}:{lineno}: annotation outside [1, 9]: ({v}, {a})"
            )
        songs.append(
            SongRecord(
                song_id=song_id,
                audio_path=audio_path,
                genre=genre,
                valence_raw=v,
                arousal_raw=a,
            )
        )
    return songs


def save_song_manifest(songs: Sequence[SongRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for s in songs:
            writer.writerow(
                [s.song_id, s.audio_path, s.genre, repr(s.valence_raw), repr(s.arousal_raw)]
            )


# --- EEG CSV -------------------------------------------------------------

def load_eeg_csv(path: str | Path) -> EEGRecording:
    """Header row of channel labels (optional leading timestamp column),
    one row of samples per 1/128 s tick."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise EEGParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    skip = 1 if header and header[0].lower() == "timestamp" else 0
    channels = header[skip:]
    if not channels:
        raise EEGParseError(f"{path}: missing channel header")
    unknown = [c for c in channels if c not in EMOTIV_CHANNELS]
    if unknown:
        raise EEGParseError(f"{path}: unknown channel label(s) {unknown}")
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise EEGParseError(f"{path}:{lineno}: ragged row")
        try:
            samples.append([float(v) for v in row[skip:]])
        except ValueError:
            raise EEGParseError(f"{path}:{lineno}: non-numeric cell") from None
    if not samples:
        raise EEGParseError(f"{path}: no samples")
    data = np.asarray(samples, dtype=float).T
    if not np.all(np.isfinite(data)):
        raise EEGParseError(f"{path}: non-finite sample value")
    return EEGRecording(channels=tuple(channels), data=data, sample_rate=SAMPLE_RATE)


def save_eeg_csv(rec: EEGRecording, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(rec.channels)
        for row in rec.data.T:
            writer.writerow([repr(float(v)) for v in row])


# --- feature cache -------------------------------------------------------

EXTRACTION_PARAMS = {
    "sample_rate": audio.SAMPLE_RATE,
    "frame_length": audio.FRAME_LENGTH,
    "hop_length": audio.HOP_LENGTH,
    "layout": [list(item) for item in audio.FRAME_FEATURE_LAYOUT],
    "stats": list(audio.AGG_STATS),
}


def extraction_params_hash() -> str:
    blob = json.dumps(EXTRACTION_PARAMS, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def audio_content_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class FeatureCache:
    params_hash: str
    entries: dict[str, dict]  # song_id -> {"audio_sha256": ..., "vector": [...]}

    def get(self, song_id: str, audio_sha256: Optional[str] = None) -> Optional[np.ndarray]:
        entry = self.entries.get(song_id)
        if entry is None:
            return None
        if audio_sha256 is not None and entry["audio_sha256"] != audio_sha256:
            return None
        return np.asarray(entry["vector"], dtype=float)

    def put(self, song_id: str, audio_sha256: str, vector: np.ndarray) -> None:
        self.entries[song_id] = {
            "audio_sha256": audio_sha256,
            "vector": [float(v) for v in vector],
        }


def new_feature_cache() -> FeatureCache:
    return FeatureCache(params_hash=extraction_params_hash(), entries={})


def load_feature_cache(path: str | Path) -> FeatureCache:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != CACHE_VERSION:
        raise BundleFormatError(f"unsupported cache version {doc.get('version')}")
    cache = FeatureCache(params_hash=doc["params_hash"], entries=doc["entries"])
    if cache.params_hash != extraction_params_hash():
        # Parameter change invalidates every entry.
        return new_feature_cache()
    return cache


def save_feature_cache(cache: FeatureCache, path: str | Path) -> None:
    doc = {
        "version": CACHE_VERSION,
        "params_hash": cache.params_hash,
        "entries": cache.entries,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True))


# --- model bundle --------------------------------------------------------

def _arr(a: np.ndarray) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _model_doc(m: svm.LinearModel) -> dict:
    return {
        "weights": _arr(m.weights),
        "bias": float(m.bias),
        "class_weights": [float(m.class_weights[0]), float(m.class_weights[1])],
        "C": float(m.C),
        "epochs": int(m.epochs),
        "converged": bool(m.converged),
        "duality_gap": float(m.duality_gap),
    }


def _model_from_doc(doc: dict) -> svm.LinearModel:
    return svm.LinearModel(
        weights=np.asarray(doc["weights"], dtype=float),
        bias=doc["bias"],
        class_weights=(doc["class_weights"][0], doc["class_weights"][1]),
        C=doc["C"],
        epochs=doc["epochs"],
        converged=doc["converged"],
        dual_objective=np.zeros(0),
        duality_gap=doc["duality_gap"],
    )


def _sbs_doc(r: selection.SBSResult) -> dict:
    return {
        "selected_indices": [int(i) for i in r.selected_indices],
        "removal_trace": [[int(i), float(s)] for i, s in r.removal_trace],
        "final_score": float(r.final_score),
        "evaluator_calls": int(r.evaluator_calls),
    }


def _sbs_from_doc(doc: dict) -> selection.SBSResult:
    return selection.SBSResult(
        selected_indices=[int(i) for i in doc["selected_indices"]],
        removal_trace=[(int(i), float(s)) for i, s in doc["removal_trace"]],
        final_score=doc["final_score"],
        evaluator_calls=doc["evaluator_calls"],
    )


def _norm_doc(n: audio.NormStats) -> dict:
    return {
        "kind": n.kind,
        "center": _arr(n.center),
        "scale": _arr(n.scale),
        "clamp": float(n.clamp),
    }


def _norm_from_doc(doc: dict) -> audio.NormStats:
    return audio.NormStats(
        kind=doc["kind"],
        center=np.asarray(doc["center"], dtype=float),
        scale=np.asarray(doc["scale"], dtype=float),
        clamp=doc["clamp"],
    )


def _axis_doc(a: AxisModel) -> dict:
    return {
        "model": _model_doc(a.model),
        "music_sbs": _sbs_doc(a.music_sbs),
        "final_sbs": _sbs_doc(a.final_sbs),
        "cv": {
            "mean": float(a.cv.mean),
            "std": float(a.cv.std),
            "fold_accuracies": _arr(a.cv.fold_accuracies),
        },
    }


def _axis_from_doc(doc: dict) -> AxisModel:
    return AxisModel(
        model=_model_from_doc(doc["model"]),
        music_sbs=_sbs_from_doc(doc["music_sbs"]),
        final_sbs=_sbs_from_doc(doc["final_sbs"]),
        cv=svm.CVResult(
            mean=doc["cv"]["mean"],
            std=doc["cv"]["std"],
            fold_accuracies=np.asarray(doc["cv"]["fold_accuracies"], dtype=float),
        ),
    )


def bundle_document(model: TrainedModel) -> dict:
    return {
        "version": BUNDLE_VERSION,
        "user_id": model.user_id,
        "config": model.config.as_dict(),
        "eeg_dim": int(model.eeg_dim),
        "reduction": {
            "kept_indices": [int(i) for i in model.reduction.kept_indices],
            "dropped_constant": [int(i) for i in model.reduction.dropped_constant],
            "dropped_quasi_constant": [
                int(i) for i in model.reduction.dropped_quasi_constant
            ],
            "dropped_correlated": [int(i) for i in model.reduction.dropped_correlated],
        },
        "music_norm": _norm_doc(model.music_norm),
        "eeg_norm": _norm_doc(model.eeg_norm),
        "valence": _axis_doc(model.valence),
        "arousal": _axis_doc(model.arousal),
        "training_trials": int(model.training_trials),
        "training_digest": model.training_digest,
    }


def save_model_bundle(model: TrainedModel, path: str | Path) -> None:
    doc = bundle_document(model)
    payload = json.dumps(doc, sort_keys=True)
    checksum = hashlib.sha256(payload.encode()).hexdigest()
    Path(path).write_text(
        json.dumps({"bundle": doc, "sha256": checksum}, sort_keys=True)
    )


def load_model_bundle(path: str | Path) -> TrainedModel:
    try:
        outer = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(outer, dict) or "bundle" not in outer or "sha256" not in outer:
        raise BundleFormatError(f"{path}: missing bundle/sha256 fields")
    doc = outer["bundle"]
    payload = json.dumps(doc, sort_keys=True)
    if hashlib.sha256(payload.encode()).hexdigest() != outer["sha256"]:
        raise ChecksumError(f"{path}: checksum mismatch")
    if doc.get("version") != BUNDLE_VERSION:
        raise BundleFormatError(f"{path}: unsupported bundle version {doc.get('version')}")
    valence = _axis_from_doc(doc["valence"])
    arousal = _axis_from_doc(doc["arousal"])
    for name, ax in (("valence", valence), ("arousal", arousal)):
        if len(ax.final_sbs.selected_indices) != ax.model.weights.shape[0]:
            raise BundleFormatError(
                f"{path}: {name} selected-index count does not match weights length"
            )
    model = TrainedModel(
        user_id=doc["user_id"],
        config=TrainConfig(**doc["config"]),
        eeg_dim=doc["eeg_dim"],
        reduction=audio.ReductionReport(
            kept_indices=[int(i) for i in doc["reduction"]["kept_indices"]],
            dropped_constant=[int(i) for i in doc["reduction"]["dropped_constant"]],
            dropped_quasi_constant=[
                int(i) for i in doc["reduction"]["dropped_quasi_constant"]
            ],
            dropped_correlated=[
                int(i) for i in doc["reduction"]["dropped_correlated"]
            ],
        ),
        music_norm=_norm_from_doc(doc["music_norm"]),
        eeg_norm=_norm_from_doc(doc["eeg_norm"]),
        valence=valence,
        arousal=arousal,
        training_trials=doc["training_trials"],
        training_digest=doc["training_digest"],
    )
    return model


# --- session log ---------------------------------------------------------

def _trial_doc(t: TrialRecord) -> dict:
    return {
        "trial_id": t.trial_id,
        "user_id": t.user_id,
        "timestamp": float(t.timestamp),
        "eeg_features": _arr(t.eeg_features),
        "song_id": t.song_id,
        "designated_quadrant": (
            t.designated_quadrant.value if t.designated_quadrant else None
        ),
        "evaluated_valence": float(t.evaluated_score.valence),
        "evaluated_arousal": float(t.evaluated_score.arousal),
        "evaluated_quadrant": t.evaluated_quadrant.value,
        "phase": t.phase,
    }


def _trial_from_doc(doc: dict) -> TrialRecord:
    return TrialRecord(
        trial_id=doc["trial_id"],
        user_id=doc["user_id"],
        timestamp=doc["timestamp"],
        eeg_features=np.asarray(doc["eeg_features"], dtype=float),
        song_id=doc["song_id"],
        evaluated_score=VAScore(doc["evaluated_valence"], doc["evaluated_arousal"]),
        phase=doc["phase"],
        designated_quadrant=(
            Quadrant(doc["designated_quadrant"])
            if doc["designated_quadrant"]
            else None
        ),
    )


def append_session_log(record: TrialRecord, path: str | Path) -> None:
    """Append one JSON line atomically (single write + flush)."""
    line = json.dumps(_trial_doc(record), sort_keys=True) + "\n"
    with Path(path).open("a") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


def load_session_log(path: str | Path) -> list[TrialRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(_trial_from_doc(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise BundleFormatError(f"{path}:{lineno}: bad log line ({exc})") from None
    return records
