"""Wire protocol: snapshots, deltas, acks, guard surfacing, and the
parallel HTTP endpoints."""

from __future__ import annotations

import asyncio
import json
import threading
import urllib.request

import pytest
from websockets.sync.client import connect

from ideascape.model import SceneState, fold_events
from ideascape.service import IdeationService, ServiceConfig
from ideascape.sessionlog import event_from_dict, scene_from_dict


class ServiceRunner:
    """Runs the asyncio service on a daemon thread for sync test clients."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.port: int | None = None
        self.service: IdeationService | None = None
        self._ready = threading.Event()
        self._stop: asyncio.Event | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _run(self) -> None:
        asyncio.run(self._main())

    async def _main(self) -> None:
        self.service = IdeationService(self.config)
        server = await self.service.start("127.0.0.1", 0)
        self.port = server.sockets[0].getsockname()[1]
        self._loop = asyncio.get_running_loop()
        self._stop = asyncio.Event()
        self._ready.set()
        await self._stop.wait()
        server.close()
        await server.wait_closed()

    def __enter__(self) -> "ServiceRunner":
        self._thread.start()
        if not self._ready.wait(timeout=10):
            raise RuntimeError("service did not start")
        return self

    def __exit__(self, *exc_info) -> None:
        if self._loop is not None and self._stop is not None:
            self._loop.call_soon_threadsafe(self._stop.set)
        self._thread.join(timeout=10)

    def url(self, session_id: str) -> str:
        return f"ws://127.0.0.1:{self.port}/ws/{session_id}"

    def http(self, path: str) -> str:
        with urllib.request.urlopen(f"http://127.0.0.1:{self.port}{path}") as resp:
            return resp.read().decode("utf-8")


@pytest.fixture
def runner(tmp_path):
    config = ServiceConfig(topic="study2-sustainability", log_dir=tmp_path / "logs")
    with ServiceRunner(config) as r:
        yield r


def recv_until(ws, predicate, limit=50, timeout=5.0):
    """Collect frames until one satisfies the predicate; returns all frames."""
    frames = []
    for _ in range(limit):
        frames.append(json.loads(ws.recv(timeout=timeout)))
        if predicate(frames[-1]):
            return frames
    raise AssertionError(f"condition never met; got {[f['type'] for f in frames]}")


def deltas_of(frames):
    return [f for f in frames if f["type"] == "scene_delta"]


class TestProtocol:
    def test_first_frame_is_snapshot(self, runner):
        with connect(runner.url("s1")) as ws:
            first = json.loads(ws.recv(timeout=5))
            assert first["type"] == "scene_snapshot"
            assert first["seq"] == 0

    def test_submit_acked_then_delta_with_full_sequence(self, runner):
        with connect(runner.url("s2")) as ws:
            ws.recv(timeout=5)  # snapshot
            ws.send(json.dumps({"type": "submit_utterance",
                                "transcript": "save more energy", "msg_id": "m1"}))
            frames = recv_until(
                ws,
                lambda f: f["type"] == "scene_delta" and any(
                    e["kind"] == "tree_added" for e in f["events"]),
            )
            acks = [f for f in frames if f["type"] == "ack"]
            assert acks and acks[0]["msg_id"] == "m1"
            assert "utterance_id" in acks[0]
            kinds = [e["kind"] for d in deltas_of(frames) for e in d["events"]]
            assert kinds == ["utterance_submitted", "categorized",
                             "island_created", "tree_added"]

    def test_dive_in_happy_path_and_guard(self, runner):
        with connect(runner.url("s3")) as ws:
            ws.recv(timeout=5)
            ws.send(json.dumps({"type": "submit_utterance",
                                "transcript": "save energy now", "msg_id": "m1"}))
            frames = recv_until(
                ws, lambda f: f["type"] == "scene_delta" and any(
                    e["kind"] == "island_created" for e in f["events"]))
            island_id = next(
                e["payload"]["island_id"]
                for d in deltas_of(frames) for e in d["events"]
                if e["kind"] == "island_created")
            ws.send(json.dumps({"type": "dive_in", "island_id": island_id,
                                "msg_id": "m2"}))
            frames = recv_until(
                ws, lambda f: f["type"] == "scene_delta" and any(
                    e["kind"] == "dive_in" for e in f["events"]))
            assert any(f["type"] == "ack" and f["msg_id"] == "m2" for f in frames)
            # Second dive while immersed surfaces the guard as an error frame.
            ws.send(json.dumps({"type": "dive_in", "island_id": island_id,
                                "msg_id": "m3"}))
            frames = recv_until(ws, lambda f: f["type"] == "error")
            error = frames[-1]
            assert error["code"] == "NotInOverview"
            assert error["msg_id"] == "m3"

    def test_malformed_message_surfaced(self, runner):
        with connect(runner.url("s4")) as ws:
            ws.recv(timeout=5)
            ws.send("this is not json")
            frames = recv_until(ws, lambda f: f["type"] == "error")
            assert frames[-1]["code"] == "MalformedMessage"

    def test_unknown_type_surfaced(self, runner):
        with connect(runner.url("s5")) as ws:
            ws.recv(timeout=5)
            ws.send(json.dumps({"type": "fly_to_moon"}))
            frames = recv_until(ws, lambda f: f["type"] == "error")
            assert frames[-1]["code"] == "MalformedMessage"

    def test_snapshot_plus_deltas_equals_fresh_snapshot(self, runner):
        with connect(runner.url("s6")) as ws:
            snapshot_frame = json.loads(ws.recv(timeout=5))
            state = scene_from_dict(snapshot_frame["state"])
            for i, text in enumerate(["save energy", "recycle paper", "bike lanes"]):
                ws.send(json.dumps({"type": "submit_utterance", "transcript": text,
                                    "msg_id": f"m{i}"}))
            # Wait for the third tree to land, folding every delta.
            frames = recv_until(
                ws,
                lambda f: f["type"] == "scene_delta" and any(
                    e["kind"] == "tree_added" and e["payload"]["tree_id"] == "tree-0003"
                    for e in f["events"]),
            )
            events = [event_from_dict(e)
                      for d in deltas_of(frames) for e in d["events"]]
            folded = fold_events(state, events)
            ws.send(json.dumps({"type": "get_snapshot", "msg_id": "snap"}))
            frames = recv_until(
                ws, lambda f: f["type"] == "scene_snapshot" and f.get("msg_id") == "snap")
            fresh = scene_from_dict(frames[-1]["state"])
            assert folded == fresh

    def test_deltas_arrive_in_contiguous_seq_order(self, runner):
        with connect(runner.url("s7")) as ws:
            snapshot_frame = json.loads(ws.recv(timeout=5))
            last = snapshot_frame["seq"]
            for i in range(6):
                ws.send(json.dumps({"type": "submit_utterance",
                                    "transcript": f"energy idea {i}"}))
            frames = recv_until(
                ws,
                lambda f: f["type"] == "scene_delta" and any(
                    e["kind"] == "tree_added" and e["payload"]["tree_id"] == "tree-0006"
                    for e in f["events"]),
                limit=200,
            )
            for delta in deltas_of(frames):
                for event in delta["events"]:
                    assert event["seq"] == last + 1
                    last = event["seq"]

    def test_sessions_are_isolated(self, runner):
        with connect(runner.url("a")) as wa, connect(runner.url("b")) as wb:
            wa.recv(timeout=5)
            wb.recv(timeout=5)
            wa.send(json.dumps({"type": "submit_utterance",
                                "transcript": "solar on roofs"}))
            recv_until(wa, lambda f: f["type"] == "scene_delta" and any(
                e["kind"] == "tree_added" for e in f["events"]))
            wb.send(json.dumps({"type": "get_snapshot", "msg_id": "q"}))
            frames = recv_until(
                wb, lambda f: f["type"] == "scene_snapshot" and f.get("msg_id") == "q")
            assert frames[-1]["state"]["islands"] == []

    def test_end_session_blocks_mutations(self, runner):
        with connect(runner.url("s8")) as ws:
            ws.recv(timeout=5)
            ws.send(json.dumps({"type": "end_session", "msg_id": "m1"}))
            recv_until(ws, lambda f: f["type"] == "ack" and f["msg_id"] == "m1")
            ws.send(json.dumps({"type": "submit_utterance", "transcript": "late"}))
            frames = recv_until(ws, lambda f: f["type"] == "error")
            assert frames[-1]["code"] == "SessionEnded"


class TestHttpEndpoints:
    def test_healthz(self, runner):
        assert runner.http("/healthz") == "ok"

    def test_snapshot_endpoint(self, runner):
        with connect(runner.url("web")) as ws:
            ws.recv(timeout=5)
            ws.send(json.dumps({"type": "submit_utterance",
                                "transcript": "rooftop garden"}))
            recv_until(ws, lambda f: f["type"] == "scene_delta" and any(
                e["kind"] == "tree_added" for e in f["events"]))
        payload = json.loads(runner.http("/sessions/web/snapshot"))
        state = scene_from_dict(payload["state"])
        assert isinstance(state, SceneState)
        assert len(state.islands) == 1

    def test_metrics_endpoint(self, runner):
        with connect(runner.url("stats")) as ws:
            ws.recv(timeout=5)
            ws.send(json.dumps({"type": "submit_utterance",
                                "transcript": "save water"}))
            recv_until(ws, lambda f: f["type"] == "scene_delta" and any(
                e["kind"] == "tree_added" for e in f["events"]))
        payload = json.loads(runner.http("/sessions/stats/metrics"))
        assert payload["report"]["fluency"] == 1

    def test_unknown_session_404(self, runner):
        with pytest.raises(urllib.error.HTTPError) as excinfo:
            runner.http("/sessions/ghost/snapshot")
        assert excinfo.value.code == 404
