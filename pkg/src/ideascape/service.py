"""Wire service: live sessions over a bidirectional WebSocket protocol.

One process serves many isolated sessions. Clients connect to
``/ws/<session_id>`` (sessions are created on first connect), send JSON
messages, and receive acknowledgements, scene deltas, and snapshots. A
parallel plain-HTTP surface serves snapshots and metrics to non-streaming
clients, plus optional static files for the browser UI.

Message catalog (one JSON object per frame):

    client -> server
      {"type": "submit_utterance", "transcript": str, "msg_id"?: str}
      {"type": "pose", "room": [x, y], "heading": float, "msg_id"?: str}
      {"type": "dive_in", "island_id": str, "msg_id"?: str}
      {"type": "dive_out", "msg_id"?: str}
      {"type": "trigger", "orb_id": str, "msg_id"?: str}
      {"type": "get_snapshot", "msg_id"?: str}
      {"type": "get_metrics", "msg_id"?: str}
      {"type": "end_session", "msg_id"?: str}

    server -> client
      {"type": "ack", "msg_id": str|null, "seq": int, "utterance_id"?: str}
      {"type": "error", "code": str, "detail": str, "msg_id": str|null}
      {"type": "scene_delta", "events": [event, ...]}   # contiguous seqs
      {"type": "scene_snapshot", "seq": int, "state": {...}}
      {"type": "metrics", "report": {...}}

Every client message is acknowledged or errored. Deltas reach each
subscriber in sequence order with no gaps; a subscriber that falls behind
its queue is resynced with a fresh snapshot instead of blocking the session.
"""

from __future__ import annotations

import asyncio
import json
import mimetypes
import time
from dataclasses import dataclass, field
from http import HTTPStatus
from pathlib import Path
from typing import Callable

from websockets.asyncio.server import Server, ServerConnection, serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Request, Response

from .errors import EngineError, MalformedMessage
from .layout import LayoutParams, DEFAULT_PARAMS
from .metrics import compute_report
from .model import SessionEvent
from .organizer import InferenceProvider
from .session import IdeationSession
from .sessionlog import event_to_dict, scene_to_dict
from .topics import load_topic

WS_PREFIX = "/ws/"

# Per-subscriber fan-out queue; overflowing subscribers get a snapshot resync.
SUBSCRIBER_QUEUE_SIZE = 256

_RESYNC = object()


@dataclass
class SessionHandle:
    session: IdeationSession
    started_mono: float


@dataclass
class ServiceConfig:
    topic: str = "study2-sustainability"
    provider_factory: Callable[[], InferenceProvider] | None = None
    params: LayoutParams = field(default_factory=lambda: DEFAULT_PARAMS)
    transition_mode: str = "dive"
    log_dir: str | Path | None = None
    static_dir: str | Path | None = None


class IdeationService:
    """Session registry plus the asyncio protocol endpoints."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.handles: dict[str, SessionHandle] = {}
        self._registry_lock = asyncio.Lock()
        self._loop: asyncio.AbstractEventLoop | None = None

    # -- sessions -------------------------------------------------------------

    def _provider(self) -> InferenceProvider:
        if self.config.provider_factory is None:
            from .organizer import MockProvider

            return MockProvider.for_topic(load_topic(self.config.topic))
        return self.config.provider_factory()

    async def get_or_create(self, session_id: str) -> SessionHandle:
        async with self._registry_lock:
            handle = self.handles.get(session_id)
            if handle is None:
                log_path = None
                if self.config.log_dir is not None:
                    log_dir = Path(self.config.log_dir)
                    log_dir.mkdir(parents=True, exist_ok=True)
                    log_path = log_dir / f"{session_id}.log"
                session = IdeationSession(
                    session_id=session_id,
                    topic=load_topic(self.config.topic),
                    provider=self._provider(),
                    params=self.config.params,
                    transition_mode=self.config.transition_mode,
                    log_path=log_path,
                )
                handle = SessionHandle(session=session, started_mono=time.monotonic())
                self.handles[session_id] = handle
            return handle

    def _now(self, handle: SessionHandle) -> float:
        return time.monotonic() - handle.started_mono

    # -- fan-out ----------------------------------------------------------------

    def _deliver(self, queue: asyncio.Queue, events: list[SessionEvent]) -> None:
        """Per-subscriber session listener: runs under the session lock,
        possibly from a worker thread; hands the payload to the loop without
        blocking event application."""
        message = json.dumps(
            {"type": "scene_delta", "events": [event_to_dict(e) for e in events]},
            sort_keys=True,
        )
        loop = self._loop
        if loop is None or loop.is_closed():
            return
        loop.call_soon_threadsafe(self._enqueue, queue, message)

    def _enqueue(self, queue: asyncio.Queue, message: str) -> None:
        try:
            queue.put_nowait(message)
        except asyncio.QueueFull:
            # Slow subscriber: drop its backlog, schedule a resync.
            while not queue.empty():
                try:
                    queue.get_nowait()
                except asyncio.QueueEmpty:
                    break
            queue.put_nowait(_RESYNC)

    # -- websocket endpoint -------------------------------------------------------

    async def handle_connection(self, connection: ServerConnection) -> None:
        path = connection.request.path if connection.request else ""
        if not path.startswith(WS_PREFIX):
            await connection.close(code=1008, reason="connect to /ws/<session-id>")
            return
        session_id = path[len(WS_PREFIX):].split("?", 1)[0]
        if not session_id:
            await connection.close(code=1008, reason="missing session id")
            return
        handle = await self.get_or_create(session_id)
        queue: asyncio.Queue = asyncio.Queue(maxsize=SUBSCRIBER_QUEUE_SIZE)
        listener = lambda events: self._deliver(queue, events)  # noqa: E731
        # subscribe() is atomic: every event after this snapshot reaches the
        # queue, so the client can fold deltas from the snapshot seq onward.
        snapshot = handle.session.subscribe(listener)
        await connection.send(json.dumps(
            {"type": "scene_snapshot", "seq": snapshot.last_seq,
             "state": scene_to_dict(snapshot)},
            sort_keys=True,
        ))
        writer = asyncio.create_task(self._writer_loop(connection, handle, queue))
        try:
            async for raw in connection:
                await self._dispatch(connection, handle, raw)
        except ConnectionClosed:
            pass
        finally:
            writer.cancel()
            handle.session.unsubscribe(listener)

    async def _writer_loop(
        self, connection: ServerConnection, handle: SessionHandle, queue: asyncio.Queue
    ) -> None:
        try:
            while True:
                item = await queue.get()
                if item is _RESYNC:
                    state = handle.session.snapshot()
                    item = json.dumps(
                        {"type": "scene_snapshot", "seq": state.last_seq,
                         "state": scene_to_dict(state)},
                        sort_keys=True,
                    )
                await connection.send(item)
        except (ConnectionClosed, asyncio.CancelledError):
            return

    async def _dispatch(
        self, connection: ServerConnection, handle: SessionHandle, raw: str | bytes
    ) -> None:
        msg_id = None
        try:
            try:
                message = json.loads(raw)
            except ValueError as exc:
                raise MalformedMessage(f"not JSON: {exc}") from exc
            if not isinstance(message, dict) or "type" not in message:
                raise MalformedMessage("message must be an object with a 'type'")
            msg_id = message.get("msg_id")
            kind = message["type"]
            session = handle.session
            t = self._now(handle)
            if kind == "submit_utterance":
                transcript = _field(message, "transcript")
                ticket = session.begin_utterance(transcript, t)
                await self._ack(connection, msg_id, session,
                                utterance_id=ticket.utterance.id)
                asyncio.get_running_loop().create_task(
                    self._finish_inference(session, ticket)
                )
            elif kind == "pose":
                room = _field(message, "room")
                heading = float(_field(message, "heading"))
                session.update_pose((float(room[0]), float(room[1])), heading, t)
                await self._ack(connection, msg_id, session)
            elif kind == "dive_in":
                session.dive_in(str(_field(message, "island_id")), t)
                await self._ack(connection, msg_id, session)
            elif kind == "dive_out":
                session.dive_out(t)
                await self._ack(connection, msg_id, session)
            elif kind == "trigger":
                session.trigger_orb(str(_field(message, "orb_id")), t)
                await self._ack(connection, msg_id, session)
            elif kind == "get_snapshot":
                state = session.snapshot()
                await connection.send(json.dumps(
                    {"type": "scene_snapshot", "seq": state.last_seq,
                     "state": scene_to_dict(state), "msg_id": msg_id},
                    sort_keys=True,
                ))
            elif kind == "get_metrics":
                report = self._metrics(handle)
                await connection.send(json.dumps(
                    {"type": "metrics", "report": report, "msg_id": msg_id},
                    sort_keys=True,
                ))
            elif kind == "end_session":
                session.end(t)
                await self._ack(connection, msg_id, session)
            else:
                raise MalformedMessage(f"unknown message type {kind!r}")
        except EngineError as exc:
            await connection.send(json.dumps(
                {"type": "error", "code": exc.code, "detail": str(exc),
                 "msg_id": msg_id},
                sort_keys=True,
            ))
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            await connection.send(json.dumps(
                {"type": "error", "code": "MalformedMessage", "detail": str(exc),
                 "msg_id": msg_id},
                sort_keys=True,
            ))

    async def _finish_inference(self, session: IdeationSession, ticket) -> None:
        """Provider call off the loop; ordered application then broadcasts."""
        outcome = await asyncio.to_thread(session.categorize, ticket)
        await asyncio.to_thread(session.complete_utterance, ticket, outcome)

    async def _ack(
        self, connection: ServerConnection, msg_id, session: IdeationSession, **extra
    ) -> None:
        payload = {"type": "ack", "msg_id": msg_id,
                   "seq": session.snapshot().last_seq, **extra}
        await connection.send(json.dumps(payload, sort_keys=True))

    # -- request/response endpoint ---------------------------------------------------

    def _metrics(self, handle: SessionHandle) -> dict:
        session = handle.session
        duration = getattr(session, "end_t", None) or self._now(handle)
        return compute_report(list(session.events), duration_s=duration).to_dict()

    def process_request(
        self, connection: ServerConnection, request: Request
    ) -> Response | None:
        path = request.path.split("?", 1)[0]
        if path.startswith(WS_PREFIX):
            return None  # continue the WebSocket handshake
        if path == "/healthz":
            return _text_response(HTTPStatus.OK, "ok")
        if path.startswith("/sessions/"):
            parts = path.strip("/").split("/")
            if len(parts) == 3:
                _, session_id, what = parts
                handle = self.handles.get(session_id)
                if handle is None:
                    return _text_response(HTTPStatus.NOT_FOUND,
                                          f"unknown session {session_id!r}")
                if what == "snapshot":
                    state = handle.session.snapshot()
                    return _json_response({
                        "seq": state.last_seq, "state": scene_to_dict(state),
                    })
                if what == "metrics":
                    try:
                        return _json_response({"report": self._metrics(handle)})
                    except EngineError as exc:
                        return _text_response(HTTPStatus.CONFLICT, str(exc))
            return _text_response(HTTPStatus.NOT_FOUND, "not found")
        if self.config.static_dir is not None:
            return self._serve_static(path)
        return _text_response(HTTPStatus.NOT_FOUND, "not found")

    def _serve_static(self, path: str) -> Response:
        root = Path(self.config.static_dir).resolve()
        relative = path.lstrip("/") or "index.html"
        target = (root / relative).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            return _text_response(HTTPStatus.NOT_FOUND, "not found")
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        headers = Headers()
        headers["Content-Type"] = content_type
        return Response(HTTPStatus.OK, "OK", headers, target.read_bytes())

    # -- lifecycle -----------------------------------------------------------------

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> Server:
        self._loop = asyncio.get_running_loop()
        return await serve(
            self.handle_connection,
            host,
            port,
            process_request=self.process_request,
        )


def _field(message: dict, key: str):
    if key not in message:
        raise MalformedMessage(f"missing field {key!r}")
    return message[key]


def _json_response(payload: dict) -> Response:
    headers = Headers()
    headers["Content-Type"] = "application/json"
    body = json.dumps(payload, sort_keys=True).encode("utf-8")
    return Response(HTTPStatus.OK, "OK", headers, body)


def _text_response(status: HTTPStatus, text: str) -> Response:
    headers = Headers()
    headers["Content-Type"] = "text/plain; charset=utf-8"
    return Response(status, status.phrase, headers, text.encode("utf-8"))


def run_service(
    config: ServiceConfig, host: str = "127.0.0.1", port: int = 8765
) -> None:
    """Blocking entry point used by the CLI."""

    async def main() -> None:
        service = IdeationService(config)
        server = await service.start(host, port)
        bound = ", ".join(
            f"{sock.getsockname()[0]}:{sock.getsockname()[1]}"
            for sock in server.sockets
        )
        print(f"listening on {bound} (ws path /ws/<session-id>)")
        await server.serve_forever()

    asyncio.run(main())
