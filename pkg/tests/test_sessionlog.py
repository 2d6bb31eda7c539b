"""Persistence: codec round-trips, durable append, corruption handling,
and replay determinism."""

from __future__ import annotations

import json

import pytest

from ideascape.errors import CorruptLine, SequenceGap
from ideascape.layout import DEFAULT_PARAMS, params_hash
from ideascape.model import EventKind, SessionEvent
from ideascape.sessionlog import (
    SessionHeader,
    SessionLogWriter,
    event_from_dict,
    event_to_dict,
    read_session,
    replay,
    replay_states,
    scene_from_dict,
    scene_to_dict,
    scene_to_json,
)

from conftest import island_created_event, tree_event, utterance_event


def _header() -> SessionHeader:
    return SessionHeader(
        topic_config_id="study2-sustainability",
        transition_mode="walk",
        layout_params_hash=params_hash(DEFAULT_PARAMS),
        started_at="2026-01-01T00:00:00+00:00",
    )


SAMPLE_EVENTS = [
    utterance_event(1, 0.5, "u1", "first idea"),
    SessionEvent(2, 0.6, EventKind.CATEGORIZED, {
        "utterance_id": "u1", "category": "Energy Saving", "summary": "s",
        "flags": [], "island_action": "created", "raw": "Energy Saving;s",
    }),
    island_created_event(3, 0.6, "isl-0001", "Energy Saving", 0),
    tree_event(4, 0.6, "isl-0001", "t1", "u1", 0),
    SessionEvent(5, 1.0, EventKind.DIVE_IN, {"island_id": "isl-0001"}),
    SessionEvent(6, 1.5, EventKind.POSE_UPDATE, {
        "room": [0.25, -0.5], "world": [1.75, -0.5], "heading": 0.125,
    }),
    SessionEvent(7, 2.0, EventKind.DIVE_OUT, {}),
    SessionEvent(8, 2.5, EventKind.INFERENCE_ERROR, {
        "utterance_id": "u1", "reason": "parse_failure", "detail": "x",
    }),
]


class TestCodec:
    @pytest.mark.parametrize("event", SAMPLE_EVENTS, ids=lambda e: e.kind.value)
    def test_round_trip_every_kind(self, event):
        assert event_from_dict(event_to_dict(event)) == event

    def test_round_trip_through_json_text(self):
        for event in SAMPLE_EVENTS:
            line = json.dumps(event_to_dict(event))
            assert event_from_dict(json.loads(line)) == event

    def test_header_round_trip(self):
        header = _header()
        assert SessionHeader.from_line(header.to_line()) == header


class TestWriter:
    def test_fresh_file_single_body_line(self, tmp_path):
        path = tmp_path / "s.log"
        with SessionLogWriter(path, _header()) as writer:
            writer.append(SAMPLE_EVENTS[0])
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("#")

    def test_sequence_gap_rejected(self, tmp_path):
        with SessionLogWriter(tmp_path / "s.log", _header()) as writer:
            writer.append(SAMPLE_EVENTS[0])
            with pytest.raises(SequenceGap):
                writer.append(island_created_event(3, 1.0, "isl-0001", "A", 0))

    def test_ten_thousand_events_round_trip_in_order(self, tmp_path):
        path = tmp_path / "big.log"
        with SessionLogWriter(path, _header()) as writer:
            for i in range(1, 10001):
                writer.append(SessionEvent(i, float(i) / 100.0, EventKind.POSE_UPDATE, {
                    "room": [0.0, 0.0], "world": [0.0, 0.0], "heading": 0.0,
                }))
        _, events = read_session(path)
        assert len(events) == 10000
        assert [e.seq for e in events] == list(range(1, 10001))


class TestReadAndReplay:
    def _write_sample(self, path):
        with SessionLogWriter(path, _header()) as writer:
            for event in SAMPLE_EVENTS:
                writer.append(event)

    def test_replay_twice_identical(self, tmp_path):
        path = tmp_path / "s.log"
        self._write_sample(path)
        assert replay(path) == replay(path)

    def test_replay_stream_matches_final(self, tmp_path):
        path = tmp_path / "s.log"
        self._write_sample(path)
        states = [state for _, state in replay_states(path)]
        assert states[-1] == replay(path)
        assert [s.last_seq for s in states] == list(range(1, len(SAMPLE_EVENTS) + 1))

    def test_truncated_last_line_reports_index(self, tmp_path):
        path = tmp_path / "s.log"
        self._write_sample(path)
        raw = path.read_text()
        path.write_text(raw[:-20])  # cut into the final line
        with pytest.raises(CorruptLine) as exc_info:
            read_session(path)
        assert exc_info.value.line_number == 1 + len(SAMPLE_EVENTS)

    def test_truncation_at_line_boundary_replays_cleanly(self, tmp_path):
        path = tmp_path / "s.log"
        self._write_sample(path)
        lines = path.read_text().splitlines()
        for keep in range(1, len(lines) + 1):
            partial = tmp_path / f"partial-{keep}.log"
            partial.write_text("\n".join(lines[:keep]) + "\n")
            state = replay(partial)
            assert state.last_seq == keep - 1

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "s.log"
        path.write_text('{"seq": 1}\n')
        with pytest.raises(CorruptLine) as exc_info:
            read_session(path)
        assert exc_info.value.line_number == 1

    def test_replay_of_live_session_equals_live_snapshot(self, session):
        session.submit_utterance("night patrol for classrooms", 1.0)
        session.submit_utterance("recycle more", 2.0)
        island = session.state.islands[0]
        session.dive_in(island.id, 3.0)
        session.submit_utterance("replace every window", 4.0)
        live = session.snapshot()
        session.end(5.0)
        replayed = replay(session.log_path)
        assert replayed == live

    def test_replay_never_calls_the_provider(self, session, provider):
        session.submit_utterance("night patrol for classrooms", 1.0)
        session.end(2.0)

        calls = []
        provider.infer = lambda *a, **k: calls.append(1)  # type: ignore[assignment]
        replay(session.log_path)
        assert calls == []


class TestSceneCodec:
    def test_scene_round_trip(self, session):
        session.submit_utterance("night patrol for classrooms", 1.0)
        island = session.state.islands[0]
        session.dive_in(island.id, 2.0)
        state = session.snapshot()
        assert scene_from_dict(scene_to_dict(state)) == state

    def test_scene_json_stable(self, session):
        session.submit_utterance("night patrol for classrooms", 1.0)
        state = session.snapshot()
        assert scene_to_json(state) == scene_to_json(state)
