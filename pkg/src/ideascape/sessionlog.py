"""Append-only session persistence and deterministic replay.

File layout: one header line starting with ``#``, then one JSON object per
line, one per event, in sequence order:

    #{"format": "ideascape.session", "version": 1, ...}
    {"kind": "utterance_submitted", "payload": {...}, "seq": 1, "t": 0.5}

Categorization results ride in the events, so replay never calls an
inference provider; a truncated file replays cleanly up to the last intact
line. All serialization for the engine lives here (events, headers, scene
snapshots), keeping the domain model wire-free.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import CorruptLine, SequenceGap, StorageFailure, TimeRegression
from .geometry import Pose, Transform2D
from .model import (
    CategoryLabel,
    EventKind,
    Island,
    Mode,
    Orb,
    Pathway,
    SceneState,
    SessionEvent,
    Tree,
    UserPose,
    fold_event,
)

FORMAT_NAME = "ideascape.session"
FORMAT_VERSION = 1

HEADER_PREFIX = "#"


@dataclass(frozen=True)
class SessionHeader:
    topic_config_id: str
    transition_mode: str
    layout_params_hash: str
    started_at: str  # ISO-8601 wall clock; body times stay session-relative
    format_version: int = FORMAT_VERSION

    def to_line(self) -> str:
        return HEADER_PREFIX + json.dumps(
            {
                "format": FORMAT_NAME,
                "version": self.format_version,
                "topic_config_id": self.topic_config_id,
                "transition_mode": self.transition_mode,
                "layout_params_hash": self.layout_params_hash,
                "started_at": self.started_at,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_line(cls, line: str) -> "SessionHeader":
        data = json.loads(line[len(HEADER_PREFIX):])
        if data.get("format") != FORMAT_NAME:
            raise ValueError(f"not a session file header: {line!r}")
        return cls(
            topic_config_id=data["topic_config_id"],
            transition_mode=data["transition_mode"],
            layout_params_hash=data["layout_params_hash"],
            started_at=data["started_at"],
            format_version=int(data["version"]),
        )

    def initial_state(self) -> SceneState:
        return SceneState.initial(self.topic_config_id, self.transition_mode)


# -- event codec --------------------------------------------------------------

def event_to_dict(event: SessionEvent) -> dict:
    return {
        "seq": event.seq,
        "t": event.t,
        "kind": EventKind(event.kind).value,
        "payload": event.payload,
    }


def event_from_dict(data: dict) -> SessionEvent:
    return SessionEvent(
        seq=int(data["seq"]),
        t=float(data["t"]),
        kind=EventKind(data["kind"]),
        payload=dict(data["payload"]),
    )


def event_to_line(event: SessionEvent) -> str:
    return json.dumps(event_to_dict(event), sort_keys=True, separators=(",", ":"))


# -- scene snapshot codec -------------------------------------------------------

def _pose_to_dict(pose: Pose) -> dict:
    return {"x": pose.x, "y": pose.y, "heading": pose.heading}


def scene_to_dict(state: SceneState) -> dict:
    """Renderer-agnostic snapshot of the whole landscape."""
    return {
        "topic_config_id": state.topic_config_id,
        "transition_mode": state.transition_mode,
        "last_seq": state.last_seq,
        "last_t": state.last_t,
        "mode": {"kind": state.mode.kind, "island_id": state.mode.island_id},
        "user": {
            "room": list(state.user.room_position),
            "world": list(state.user.world_position),
            "heading": state.user.heading,
        },
        "islands": [
            {
                "id": island.id,
                "category": island.category.display,
                "cloud_label": island.cloud_label,
                "overview_pose": _pose_to_dict(island.overview_pose),
                "pathway": {
                    "radius": island.pathway.radius,
                    "entry_angle": island.pathway.entry_angle,
                },
                "body_radius": island.body_radius,
                "trees": [
                    {
                        "id": tree.id,
                        "utterance_id": tree.utterance_id,
                        "summary": tree.summary,
                        "slot": tree.slot,
                        "created_at": tree.created_at,
                    }
                    for tree in island.trees
                ],
            }
            for island in state.islands
        ],
        "orbs": [
            {
                "target_island_id": orb.target_island_id,
                "pose": list(orb.pose),
                "pulse_count": orb.pulse_count,
            }
            for orb in state.orbs
        ],
        "unseen": {k: state.unseen[k] for k in sorted(state.unseen)},
        "placement": (
            None
            if state.placement is None
            else {
                "rotation": state.placement.rotation,
                "translation": list(state.placement.translation),
            }
        ),
        "utterance_ids": sorted(state.utterance_ids),
    }


def scene_from_dict(data: dict) -> SceneState:
    islands = tuple(
        Island(
            id=entry["id"],
            category=CategoryLabel(entry["category"]),
            cloud_label=entry["cloud_label"],
            overview_pose=Pose(
                entry["overview_pose"]["x"],
                entry["overview_pose"]["y"],
                entry["overview_pose"]["heading"],
            ),
            pathway=Pathway(
                entry["pathway"]["radius"], entry["pathway"]["entry_angle"]
            ),
            body_radius=entry["body_radius"],
            trees=tuple(
                Tree(
                    id=t["id"],
                    utterance_id=t["utterance_id"],
                    summary=t["summary"],
                    slot=int(t["slot"]),
                    created_at=t["created_at"],
                )
                for t in entry["trees"]
            ),
        )
        for entry in data["islands"]
    )
    mode = (
        Mode.immersed(data["mode"]["island_id"])
        if data["mode"]["kind"] == "immersed"
        else Mode.overview()
    )
    placement = data["placement"]
    return SceneState(
        topic_config_id=data["topic_config_id"],
        transition_mode=data["transition_mode"],
        islands=islands,
        user=UserPose(
            room_position=tuple(data["user"]["room"]),  # type: ignore[arg-type]
            world_position=tuple(data["user"]["world"]),  # type: ignore[arg-type]
            heading=data["user"]["heading"],
            mode=mode,
        ),
        orbs=tuple(
            Orb(o["target_island_id"], tuple(o["pose"]), int(o["pulse_count"]))  # type: ignore[arg-type]
            for o in data["orbs"]
        ),
        unseen=dict(data["unseen"]),
        placement=(
            None
            if placement is None
            else Transform2D(placement["rotation"], tuple(placement["translation"]))  # type: ignore[arg-type]
        ),
        utterance_ids=frozenset(data["utterance_ids"]),
        last_seq=int(data["last_seq"]),
        last_t=float(data["last_t"]),
    )


def scene_to_json(state: SceneState) -> str:
    return json.dumps(scene_to_dict(state), sort_keys=True, separators=(",", ":"))


# -- writer ---------------------------------------------------------------------

class SessionLogWriter:
    """Single appender for one session file.

    ``append`` is durable: the line is flushed and fsynced before returning,
    so an acknowledged event survives a crash.
    """

    def __init__(self, path: str | Path, header: SessionHeader):
        self.path = Path(path)
        self._last_seq = 0
        self._last_t = 0.0
        try:
            self._file = open(self.path, "a", encoding="utf-8")
            if self._file.tell() == 0:
                self._file.write(header.to_line() + "\n")
                self._file.flush()
                os.fsync(self._file.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot open {self.path}: {exc}") from exc

    def append(self, event: SessionEvent) -> None:
        if event.seq != self._last_seq + 1:
            raise SequenceGap(f"expected seq {self._last_seq + 1}, got {event.seq}")
        if event.t < self._last_t:
            raise TimeRegression(f"event at t={event.t} precedes t={self._last_t}")
        try:
            self._file.write(event_to_line(event) + "\n")
            self._file.flush()
            os.fsync(self._file.fileno())
        except OSError as exc:
            raise StorageFailure(f"append to {self.path} failed: {exc}") from exc
        self._last_seq = event.seq
        self._last_t = event.t

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "SessionLogWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


# -- reader / replay --------------------------------------------------------------

def read_session(path: str | Path) -> tuple[SessionHeader, list[SessionEvent]]:
    """Parse a session file strictly.

    Raises CorruptLine with the 1-based line number of the first bad line;
    everything before it parsed cleanly.
    """
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorruptLine(1, "empty file, missing header")
    if not lines[0].startswith(HEADER_PREFIX):
        raise CorruptLine(1, "missing header line")
    try:
        header = SessionHeader.from_line(lines[0])
    except (ValueError, KeyError) as exc:
        raise CorruptLine(1, f"bad header: {exc}") from exc
    events: list[SessionEvent] = []
    for index, line in enumerate(lines[1:], start=2):
        try:
            events.append(event_from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptLine(index, f"bad event line: {exc}") from exc
    return header, events


def replay_states(path: str | Path) -> Iterator[tuple[SessionEvent, SceneState]]:
    """Fold the log in order, yielding each event with the state after it."""
    header, events = read_session(path)
    state = header.initial_state()
    for event in events:
        state = fold_event(state, event)
        yield event, state


def replay(path: str | Path) -> SceneState:
    """Final state of a recorded session; identical to the live session's
    final snapshot."""
    header, events = read_session(path)
    state = header.initial_state()
    for event in events:
        state = fold_event(state, event)
    return state
