"""HTTP session service: a thin adapter over the regulation engine.

Protocol per session: start -> designate + submit EEG -> next-song ->
report -> (next-song -> report)* -> stats.  Out-of-order calls get a 409.
No business logic lives here; every behavior is delegated to the engine
and pipeline modules.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from pydantic import BaseModel

from . import eeg as eeg_mod
from . import engine, store
from .core import PHASES, Quadrant, SongRecord, VAScore
from .errors import MoodloopError, NoCandidatesError
from .pipeline import TrainedModel

SESSION_TIMEOUT_S = 30 * 60  # comfortable-wear bound on one sitting


class StartSessionRequest(BaseModel):
    user_id: str
    phase: str = "testing"
    seed: int = 0


class DesignateRequest(BaseModel):
    quadrant: str


class SubmitEEGRequest(BaseModel):
    # Either an inline window (channel labels + channel-major samples)
    # or a server-side replay file reference.
    channels: Optional[list[str]] = None
    samples: Optional[list[list[float]]] = None
    replay_path: Optional[str] = None
    window_length: int = 2


class ReportRequest(BaseModel):
    valence: float
    arousal: float


@dataclass
class _Session:
    state: engine.SessionState
    created_at: float = field(default_factory=time.time)
    pending: Optional[engine.Recommendation] = None
    last_matched: Optional[bool] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def expired(self) -> bool:
        return time.time() - self.created_at > SESSION_TIMEOUT_S


def create_app(
    model: TrainedModel,
    library: Sequence[SongRecord],
    log_dir: Optional[str | Path] = None,
) -> FastAPI:
    missing = [s.song_id for s in library if s.feature_vector is None]
    if missing:
        raise ValueError(f"library songs without cached features: {missing[:3]}")
    app = FastAPI(title="moodloop session service")
    sessions: dict[str, _Session] = {}
    songs_by_id = {s.song_id: s for s in library}
    log_dir = Path(log_dir) if log_dir else None

    def get_session(sid: str) -> _Session:
        sess = sessions.get(sid)
        if sess is None or sess.expired:
            raise HTTPException(404, f"unknown or expired session {sid}")
        return sess

    @app.post("/session/start")
    def start_session(req: StartSessionRequest):
        if req.phase not in PHASES:
            raise HTTPException(422, f"phase must be one of {PHASES}")
        sid = uuid.uuid4().hex
        sessions[sid] = _Session(
            state=engine.SessionState(
                user_id=req.user_id, phase=req.phase, seed=req.seed
            )
        )
        return {"session_id": sid}

    @app.post("/session/{sid}/designate")
    def designate(sid: str, req: DesignateRequest):
        sess = get_session(sid)
        try:
            quadrant = Quadrant(req.quadrant)
        except ValueError:
            raise HTTPException(422, f"unknown quadrant {req.quadrant!r}") from None
        with sess.lock:
            if sess.pending is not None:
                raise HTTPException(
                    409, "report the current song before redesignating"
                )
            sess.state.designated_quadrant = quadrant
        return {"ok": True}

    @app.post("/session/{sid}/eeg")
    def submit_eeg(sid: str, req: SubmitEEGRequest):
        sess = get_session(sid)
        try:
            if req.replay_path is not None:
                rec = store.load_eeg_csv(req.replay_path)
            elif req.channels is not None and req.samples is not None:
                rec = eeg_mod.EEGRecording(
                    channels=tuple(req.channels),
                    data=np.asarray(req.samples, dtype=float),
                )
            else:
                raise HTTPException(
                    422, "provide channels+samples or replay_path"
                )
            two_channel = model.eeg_dim == eeg_mod.EEG_FEATURE_DIM_2CH
            features = eeg_mod.features_from_recording(
                rec, window_length=req.window_length, two_channel=two_channel
            )
        except MoodloopError as exc:
            raise HTTPException(422, str(exc)) from None
        with sess.lock:
            sess.state.current_eeg_features = features
        return {"ok": True, "feature_dim": int(features.shape[0])}

    @app.post("/session/{sid}/next-song")
    def next_song(sid: str):
        sess = get_session(sid)
        with sess.lock:
            state = sess.state
            if state.designated_quadrant is None:
                raise HTTPException(409, "designate a quadrant first")
            if state.current_eeg_features is None:
                raise HTTPException(409, "submit EEG before requesting a song")
            if sess.pending is not None:
                raise HTTPException(409, "report the current song first")
            try:
                rec = engine.recommend(
                    state.designated_quadrant,
                    state.current_eeg_features,
                    list(songs_by_id.values()),
                    model,
                    state.rng,
                )
            except NoCandidatesError as exc:
                raise HTTPException(409, str(exc)) from None
            sess.pending = rec
        return {
            "song_id": rec.song.song_id,
            "audio_url": f"/audio/{rec.song.song_id}",
            "iteration_count": rec.iteration_count,
            "matched": rec.matched,
        }

    @app.post("/session/{sid}/report")
    def report(sid: str, req: ReportRequest):
        sess = get_session(sid)
        with sess.lock:
            if sess.pending is None:
                raise HTTPException(409, "no song awaiting a report")
            try:
                score = VAScore(req.valence, req.arousal)
            except MoodloopError as exc:
                raise HTTPException(422, str(exc)) from None
            record = sess.state.log_trial(
                sess.pending.song,
                score,
                designated=sess.state.designated_quadrant,
            )
            sess.pending = None
            sess.last_matched = record.matched
            if log_dir is not None:
                store.append_session_log(record, log_dir / f"{sid}.jsonl")
        return {"matched": record.matched, "trial_count": len(sess.state.trial_log)}

    def _stats(sess: _Session) -> dict:
        trials = sess.state.trial_log
        out: dict = {"trial_count": len(trials)}
        try:
            out["match_rate"] = engine.match_rate(trials)
        except MoodloopError:
            out["match_rate"] = None
        try:
            t_v, t_a = engine.instability_scores(trials)
            out["t_valence"], out["t_arousal"] = t_v, t_a
        except MoodloopError:
            out["t_valence"] = out["t_arousal"] = None
        return out

    @app.get("/session/{sid}/stats")
    def session_stats(sid: str):
        return _stats(get_session(sid))

    @app.get("/stats")
    def stats(session_id: str):
        return _stats(get_session(session_id))

    @app.get("/audio/{song_id}")
    def audio_file(song_id: str):
        song = songs_by_id.get(song_id)
        if song is None:
            raise HTTPException(404, f"unknown song {song_id}")
        path = Path(song.audio_path)
        if not path.exists():
            raise HTTPException(404, f"no audio file for {song_id}")
        return FileResponse(path, media_type="audio/wav")

    return app
