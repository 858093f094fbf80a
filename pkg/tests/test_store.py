import json

import numpy as np
import pytest

from moodloop import eeg, engine, store
from moodloop.core import Quadrant, SongRecord, TrialRecord, VAScore
from moodloop.errors import BundleFormatError, ChecksumError, EEGParseError, ManifestError

MANIFEST = """song_id,audio_path,genre,valence_raw,arousal_raw
s0001,audio/s0001.wav,Rock,7,3
s0002,audio/s0002.wav,Jazz,3,8
"""


class TestSongManifest:
    def test_load_and_rescale(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text(MANIFEST)
        songs = store.load_song_manifest(p)
        assert songs[0].rescaled_annotation == (2.0, -2.0)
        assert songs[0].annotation_quadrant is Quadrant.Q4
        assert songs[1].annotation_quadrant is Quadrant.Q2

    def test_duplicate_id_reports_both_lines(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text(
            MANIFEST + "s0001,audio/x.wav,Pop,5,5\n"
        )
        with pytest.raises(ManifestError, match=r"s0001.*line 2"):
            store.load_song_manifest(p)

    def test_out_of_range_annotation(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text(
            "song_id,audio_path,genre,valence_raw,arousal_raw\n"
            "s1,a.wav,Rock,10,5\n"
        )
        with pytest.raises(ManifestError, match=":2:"):
            store.load_song_manifest(p)

    def test_unknown_genre(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text(
            "song_id,audio_path,genre,valence_raw,arousal_raw\ns1,a.wav,Dub,5,5\n"
        )
        with pytest.raises(ManifestError, match="Dub"):
            store.load_song_manifest(p)

    def test_non_numeric_annotation(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text(
            "song_id,audio_path,genre,valence_raw,arousal_raw\ns1,a.wav,Rock,x,5\n"
        )
        with pytest.raises(ManifestError, match="non-numeric"):
            store.load_song_manifest(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text("id,path\ns1,a.wav\n")
        with pytest.raises(ManifestError, match="header"):
            store.load_song_manifest(p)

    def test_round_trip(self, tmp_path):
        p = tmp_path / "songs.csv"
        p.write_text(MANIFEST)
        songs = store.load_song_manifest(p)
        q = tmp_path / "copy.csv"
        store.save_song_manifest(songs, q)
        assert store.load_song_manifest(q) == songs


class TestEEGCSV:
    def test_full_recording_duration(self, tmp_path):
        p = tmp_path / "eeg.csv"
        header = ",".join(eeg.EMOTIV_CHANNELS)
        body = "\n".join(",".join(["0.5"] * 14) for _ in range(2560))
        p.write_text(header + "\n" + body + "\n")
        rec = store.load_eeg_csv(p)
        assert rec.duration == 20.0
        assert rec.channels == eeg.EMOTIV_CHANNELS

    def test_two_channel_header_accepted(self, tmp_path):
        p = tmp_path / "eeg.csv"
        p.write_text("T7,T8\n1.0,2.0\n3.0,4.0\n")
        rec = store.load_eeg_csv(p)
        assert rec.channels == ("T7", "T8")
        assert np.array_equal(rec.data, [[1.0, 3.0], [2.0, 4.0]])

    def test_timestamp_column_ignored(self, tmp_path):
        p = tmp_path / "eeg.csv"
        p.write_text("timestamp,T7,T8\n0.0,1.0,2.0\n0.0078,3.0,4.0\n")
        rec = store.load_eeg_csv(p)
        assert rec.channels == ("T7", "T8")
        assert np.array_equal(rec.data, [[1.0, 3.0], [2.0, 4.0]])

    def test_ragged_row_reports_line(self, tmp_path):
        p = tmp_path / "eeg.csv"
        p.write_text("T7,T8\n1.0,2.0\n3.0\n")
        with pytest.raises(EEGParseError, match=":3:"):
            store.load_eeg_csv(p)

    def test_non_numeric_cell(self, tmp_path):
        p = tmp_path / "eeg.csv"
        p.write_text("T7,T8\n1.0,oops\n")
        with pytest.raises(EEGParseError, match="non-numeric"):
            store.load_eeg_csv(p)

    def test_unknown_channel_label(self, tmp_path):
        p = tmp_path / "eeg.csv"
        p.write_text("T7,ZZ\n1.0,2.0\n")
        with pytest.raises(EEGParseError, match="ZZ"):
            store.load_eeg_csv(p)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        rec = eeg.EEGRecording(
            channels=("T7", "T8"), data=rng.standard_normal((2, 64))
        )
        p = tmp_path / "eeg.csv"
        store.save_eeg_csv(rec, p)
        again = store.load_eeg_csv(p)
        assert np.array_equal(again.data, rec.data)


class TestFeatureCache:
    def test_put_get_round_trip(self, tmp_path):
        cache = store.new_feature_cache()
        vec = np.arange(5.0)
        cache.put("s1", "hash1", vec)
        p = tmp_path / "cache.json"
        store.save_feature_cache(cache, p)
        again = store.load_feature_cache(p)
        assert np.array_equal(again.get("s1"), vec)
        assert np.array_equal(again.get("s1", "hash1"), vec)

    def test_content_hash_mismatch_misses(self):
        cache = store.new_feature_cache()
        cache.put("s1", "hash1", np.ones(3))
        assert cache.get("s1", "other") is None
        assert cache.get("missing") is None

    def test_params_change_invalidates(self, tmp_path):
        cache = store.new_feature_cache()
        cache.put("s1", "hash1", np.ones(3))
        p = tmp_path / "cache.json"
        store.save_feature_cache(cache, p)
        doc = json.loads(p.read_text())
        doc["params_hash"] = "0" * 64
        p.write_text(json.dumps(doc))
        fresh = store.load_feature_cache(p)
        assert fresh.get("s1") is None

    def test_version_mismatch_rejected(self, tmp_path):
        p = tmp_path / "cache.json"
        p.write_text(json.dumps({"version": 99, "params_hash": "x", "entries": {}}))
        with pytest.raises(BundleFormatError):
            store.load_feature_cache(p)


class TestModelBundle:
    def test_round_trip_identical_predictions(self, tmp_path, small_setup):
        p = tmp_path / "bundle.json"
        store.save_model_bundle(small_setup.model, p)
        loaded = store.load_model_bundle(p)
        rng = np.random.default_rng(1)
        for song in small_setup.library[:10]:
            feats = rng.standard_normal(small_setup.model.eeg_dim)
            assert loaded.predict_quadrant(
                feats, song.feature_vector
            ) == small_setup.model.predict_quadrant(feats, song.feature_vector)

    def test_save_load_save_is_byte_identical(self, tmp_path, small_setup):
        p1 = tmp_path / "b1.json"
        p2 = tmp_path / "b2.json"
        store.save_model_bundle(small_setup.model, p1)
        store.save_model_bundle(store.load_model_bundle(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_corrupted_file_fails_checksum(self, tmp_path, small_setup):
        p = tmp_path / "bundle.json"
        store.save_model_bundle(small_setup.model, p)
        text = p.read_text().replace('"eeg_dim": 40', '"eeg_dim": 41', 1)
        p.write_text(text)
        with pytest.raises(ChecksumError):
            store.load_model_bundle(p)

    def test_weights_selection_mismatch_rejected(self, tmp_path, small_setup):
        p = tmp_path / "bundle.json"
        doc = store.bundle_document(small_setup.model)
        doc["valence"]["model"]["weights"] = doc["valence"]["model"]["weights"][:-1]
        payload = json.dumps(doc, sort_keys=True)
        import hashlib

        p.write_text(
            json.dumps(
                {
                    "bundle": doc,
                    "sha256": hashlib.sha256(payload.encode()).hexdigest(),
                },
                sort_keys=True,
            )
        )
        with pytest.raises(BundleFormatError, match="weights"):
            store.load_model_bundle(p)

    def test_version_mismatch_rejected(self, tmp_path, small_setup):
        p = tmp_path / "bundle.json"
        doc = store.bundle_document(small_setup.model)
        doc["version"] = 99
        payload = json.dumps(doc, sort_keys=True)
        import hashlib

        p.write_text(
            json.dumps(
                {
                    "bundle": doc,
                    "sha256": hashlib.sha256(payload.encode()).hexdigest(),
                },
                sort_keys=True,
            )
        )
        with pytest.raises(BundleFormatError, match="version"):
            store.load_model_bundle(p)

    def test_garbage_file(self, tmp_path):
        p = tmp_path / "bundle.json"
        p.write_text("not json at all")
        with pytest.raises(BundleFormatError):
            store.load_model_bundle(p)


def make_trial(i):
    return TrialRecord(
        trial_id=f"t{i}",
        user_id="u",
        timestamp=float(i),
        eeg_features=np.linspace(0, 1, 40) * i,
        song_id=f"s{i % 3}",
        evaluated_score=VAScore(float(i % 5) - 2, float(i % 3) - 1),
        phase="testing",
        designated_quadrant=list(Quadrant)[i % 4],
    )


class TestSessionLog:
    def test_append_and_reload_equal_records(self, tmp_path):
        p = tmp_path / "log.jsonl"
        trials = [make_trial(i) for i in range(22)]
        for t in trials:
            store.append_session_log(t, p)
        assert len(p.read_text().splitlines()) == 22
        loaded = store.load_session_log(p)
        assert len(loaded) == 22
        for a, b in zip(loaded, trials):
            assert a.trial_id == b.trial_id
            assert a.evaluated_score == b.evaluated_score
            assert a.designated_quadrant == b.designated_quadrant
            assert np.array_equal(a.eeg_features, b.eeg_features)

    def test_replay_preserves_match_statistics(self, tmp_path):
        p = tmp_path / "log.jsonl"
        trials = [make_trial(i) for i in range(12)]
        for t in trials:
            store.append_session_log(t, p)
        loaded = store.load_session_log(p)
        assert engine.match_rate(loaded) == engine.match_rate(trials)
        assert engine.instability_scores(loaded) == engine.instability_scores(trials)

    def test_bad_line_reports_number(self, tmp_path):
        p = tmp_path / "log.jsonl"
        store.append_session_log(make_trial(0), p)
        with p.open("a") as fh:
            fh.write("{broken\n")
        with pytest.raises(BundleFormatError, match=":2:"):
            store.load_session_log(p)
