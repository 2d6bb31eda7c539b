"""Domain vocabulary of the idea landscape.

Defines every artifact the engine reasons about: utterances, category
labels, islands and trees, orbs, the user pose with its dual-scale mode,
session events, and the immutable :class:`SceneState` snapshot. The one
operation here is :func:`fold_event`, the pure reducer that turns an event
stream into scene snapshots.

Events carry all the geometry they need (island poses, pathway shape,
teleport alignment), so folding a recorded log never consults layout
parameters or an inference provider. That is what makes replay hermetic and
bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .errors import InvalidReference, SequenceGap
from .geometry import Pose, Transform2D, Vec2, from_angle, scale, unit, wrap_angle

# Slot sentinel for the 9th+ idea in a category: kept in state and logs,
# never placed by layout.
OVERFLOW_SLOT = -1

SLOTS_PER_ISLAND = 8

# Dwell/location marker for "not inside any island".
OVERVIEW_AREA = "overview"


def normalize_category(text: str) -> str:
    """Canonical form used for category equality: trim, collapse internal
    whitespace, case-fold."""
    return " ".join(text.split()).casefold()


class CategoryLabel:
    """Category name; equality and hashing use the normalized form while the
    original casing is preserved for display."""

    __slots__ = ("display", "normalized")

    def __init__(self, display: str):
        display = " ".join(display.split())
        if not display:
            raise ValueError("category name must be non-empty")
        self.display = display
        self.normalized = normalize_category(display)

    @property
    def word_count(self) -> int:
        return len(self.display.split())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CategoryLabel):
            return NotImplemented
        return self.normalized == other.normalized

    def __hash__(self) -> int:
        return hash(self.normalized)

    def __repr__(self) -> str:
        return f"CategoryLabel({self.display!r})"


@dataclass(frozen=True)
class Utterance:
    """One transcribed idea submission."""

    id: str
    t: float
    transcript: str

    def __post_init__(self):
        if not self.transcript.strip():
            raise ValueError("transcript must be non-empty")
        if self.t < 0:
            raise ValueError("utterance time must be >= 0")


@dataclass(frozen=True)
class Mode:
    """Dual-scale vantage: the whole landscape from above, or one island at
    body scale."""

    kind: str  # "overview" | "immersed"
    island_id: str | None = None

    @classmethod
    def overview(cls) -> "Mode":
        return cls("overview", None)

    @classmethod
    def immersed(cls, island_id: str) -> "Mode":
        return cls("immersed", island_id)

    @property
    def is_overview(self) -> bool:
        return self.kind == "overview"

    @property
    def is_immersed(self) -> bool:
        return self.kind == "immersed"


@dataclass(frozen=True)
class Pathway:
    """Closed circular walking loop inside an island, centre-relative.

    The entry point sits on the loop at ``entry_angle``; walking direction is
    counter-clockwise, so the tangent at angle a is a + pi/2.
    """

    radius: float
    entry_angle: float = 0.0

    def point_at(self, angle: float) -> Vec2:
        return scale(from_angle(angle), self.radius)

    @property
    def entry_point(self) -> Vec2:
        return self.point_at(self.entry_angle)

    @property
    def entry_tangent(self) -> float:
        return wrap_angle(self.entry_angle + math.pi / 2.0)


@dataclass(frozen=True)
class Tree:
    """A single idea, standing inside its category island."""

    id: str
    utterance_id: str
    summary: str
    slot: int  # 0..7, or OVERFLOW_SLOT
    created_at: float

    @property
    def is_overflow(self) -> bool:
        return self.slot == OVERFLOW_SLOT


@dataclass(frozen=True)
class Island:
    """A category rendered as a navigable domain.

    Carries its own geometry (overview pose, pathway, body radius) so that
    scene snapshots are self-contained.
    """

    id: str
    category: CategoryLabel
    cloud_label: str
    overview_pose: Pose
    pathway: Pathway
    body_radius: float
    trees: tuple[Tree, ...] = ()

    @property
    def placed_trees(self) -> tuple[Tree, ...]:
        return tuple(t for t in self.trees if not t.is_overflow)

    @property
    def overflow_trees(self) -> tuple[Tree, ...]:
        return tuple(t for t in self.trees if t.is_overflow)

    def occupied_slots(self) -> set[int]:
        return {t.slot for t in self.trees if not t.is_overflow}


@dataclass(frozen=True)
class Orb:
    """Peripheral stand-in for a non-current island while immersed."""

    target_island_id: str
    pose: Vec2  # world position
    pulse_count: int


@dataclass(frozen=True)
class UserPose:
    """Tracked user: physical room position plus its virtual-world image."""

    room_position: Vec2
    world_position: Vec2
    heading: float
    mode: Mode

    @classmethod
    def initial(cls) -> "UserPose":
        return cls((0.0, 0.0), (0.0, 0.0), 0.0, Mode.overview())


class EventKind(str, Enum):
    UTTERANCE_SUBMITTED = "utterance_submitted"
    CATEGORIZED = "categorized"
    ISLAND_CREATED = "island_created"
    TREE_ADDED = "tree_added"
    DIVE_IN = "dive_in"
    DIVE_OUT = "dive_out"
    WALK_TELEPORT = "walk_teleport"
    POSE_UPDATE = "pose_update"
    INFERENCE_ERROR = "inference_error"


@dataclass(frozen=True)
class SessionEvent:
    """One record of the append-only session log."""

    seq: int
    t: float
    kind: EventKind
    payload: dict


@dataclass(frozen=True)
class SceneState:
    """Immutable landscape snapshot, derivable by folding events in order."""

    topic_config_id: str
    transition_mode: str  # "walk" | "dive": where orbs sit for non-current islands
    islands: tuple[Island, ...] = ()
    user: UserPose = field(default_factory=UserPose.initial)
    orbs: tuple[Orb, ...] = ()
    # Ideas added to each island since the user last stood on it.
    unseen: Mapping[str, int] = field(default_factory=dict)
    # World placement of the current immersed island (identity after dive-in,
    # realigned after walk-teleport). None in overview.
    placement: Transform2D | None = None
    utterance_ids: frozenset[str] = frozenset()
    last_seq: int = 0
    last_t: float = 0.0

    @classmethod
    def initial(cls, topic_config_id: str, transition_mode: str = "dive") -> "SceneState":
        if transition_mode not in ("walk", "dive"):
            raise ValueError("transition_mode must be 'walk' or 'dive'")
        return cls(topic_config_id=topic_config_id, transition_mode=transition_mode)

    @property
    def mode(self) -> Mode:
        return self.user.mode

    def island_by_id(self, island_id: str) -> Island | None:
        for island in self.islands:
            if island.id == island_id:
                return island
        return None

    def island_by_category(self, category: CategoryLabel) -> Island | None:
        for island in self.islands:
            if island.category == category:
                return island
        return None

    @property
    def tree_count(self) -> int:
        return sum(len(i.trees) for i in self.islands)

    def current_island(self) -> Island | None:
        if self.mode.is_immersed and self.mode.island_id is not None:
            return self.island_by_id(self.mode.island_id)
        return None


def derive_orbs(state: SceneState, transition_mode: str | None = None) -> tuple[Orb, ...]:
    """Orbs for every non-current island, anchored per transition mode.

    Walk mode puts each orb on the pathway loop at the point facing the
    target island's overview bearing; dive mode puts it at the island edge on
    the same bearing. Empty in overview.
    """
    mode = transition_mode or state.transition_mode
    current = state.current_island()
    if current is None:
        return ()
    placement = state.placement or Transform2D.identity()
    orbs = []
    for island in state.islands:
        if island.id == current.id:
            continue
        direction = unit(
            (
                island.overview_pose.x - current.overview_pose.x,
                island.overview_pose.y - current.overview_pose.y,
            )
        )
        radius = current.pathway.radius if mode == "walk" else current.body_radius
        local = scale(direction, radius)
        orbs.append(
            Orb(
                target_island_id=island.id,
                pose=placement.apply(local),
                pulse_count=int(state.unseen.get(island.id, 0)),
            )
        )
    return tuple(orbs)


# -- fold -------------------------------------------------------------------

def _require(payload: dict, key: str):
    if key not in payload:
        raise InvalidReference(f"event payload missing {key!r}")
    return payload[key]


def _fold_utterance_submitted(state: SceneState, event: SessionEvent) -> SceneState:
    utterance_id = str(_require(event.payload, "utterance_id"))
    transcript = str(_require(event.payload, "transcript"))
    if not transcript.strip():
        raise InvalidReference("utterance transcript is empty")
    if utterance_id in state.utterance_ids:
        raise InvalidReference(f"duplicate utterance id {utterance_id!r}")
    return replace(state, utterance_ids=state.utterance_ids | {utterance_id})


def _fold_categorized(state: SceneState, event: SessionEvent) -> SceneState:
    utterance_id = str(_require(event.payload, "utterance_id"))
    if utterance_id not in state.utterance_ids:
        raise InvalidReference(f"categorized unknown utterance {utterance_id!r}")
    _require(event.payload, "category")
    _require(event.payload, "summary")
    return state


def _fold_island_created(state: SceneState, event: SessionEvent) -> SceneState:
    island_id = str(_require(event.payload, "island_id"))
    if state.island_by_id(island_id) is not None:
        raise InvalidReference(f"duplicate island id {island_id!r}")
    category = CategoryLabel(str(_require(event.payload, "category")))
    if state.island_by_category(category) is not None:
        raise InvalidReference(f"category {category.display!r} already has an island")
    cloud_label = str(event.payload.get("cloud_label", category.display))
    if normalize_category(cloud_label) != category.normalized:
        raise InvalidReference("cloud label must match the category name")
    pose = _require(event.payload, "overview_pose")
    pathway = _require(event.payload, "pathway")
    island = Island(
        id=island_id,
        category=category,
        cloud_label=cloud_label,
        overview_pose=Pose(float(pose["x"]), float(pose["y"]), float(pose.get("heading", 0.0))),
        pathway=Pathway(float(pathway["radius"]), float(pathway.get("entry_angle", 0.0))),
        body_radius=float(_require(event.payload, "body_radius")),
    )
    unseen = dict(state.unseen)
    unseen[island_id] = 0
    next_state = replace(state, islands=state.islands + (island,), unseen=unseen)
    return replace(next_state, orbs=derive_orbs(next_state))


def _fold_tree_added(state: SceneState, event: SessionEvent) -> SceneState:
    island_id = str(_require(event.payload, "island_id"))
    island = state.island_by_id(island_id)
    if island is None:
        raise InvalidReference(f"tree added to unknown island {island_id!r}")
    utterance_id = str(_require(event.payload, "utterance_id"))
    if utterance_id not in state.utterance_ids:
        raise InvalidReference(f"tree references unknown utterance {utterance_id!r}")
    slot = int(_require(event.payload, "slot"))
    if slot != OVERFLOW_SLOT:
        if not 0 <= slot < SLOTS_PER_ISLAND:
            raise InvalidReference(f"slot {slot} outside 0..7")
        if slot in island.occupied_slots():
            raise InvalidReference(f"slot {slot} already occupied on {island_id!r}")
    tree = Tree(
        id=str(_require(event.payload, "tree_id")),
        utterance_id=utterance_id,
        summary=str(_require(event.payload, "summary")),
        slot=slot,
        created_at=event.t,
    )
    grown = replace(island, trees=island.trees + (tree,))
    islands = tuple(grown if i.id == island_id else i for i in state.islands)
    unseen = dict(state.unseen)
    standing_here = state.mode.is_immersed and state.mode.island_id == island_id
    if not standing_here:
        unseen[island_id] = unseen.get(island_id, 0) + 1
    next_state = replace(state, islands=islands, unseen=unseen)
    return replace(next_state, orbs=derive_orbs(next_state))


def _fold_dive_in(state: SceneState, event: SessionEvent) -> SceneState:
    island_id = str(_require(event.payload, "island_id"))
    island = state.island_by_id(island_id)
    if island is None:
        raise InvalidReference(f"dive into unknown island {island_id!r}")
    unseen = dict(state.unseen)
    unseen[island_id] = 0
    user = replace(
        state.user,
        world_position=island.pathway.entry_point,
        heading=island.pathway.entry_tangent,
        mode=Mode.immersed(island_id),
    )
    next_state = replace(
        state, user=user, unseen=unseen, placement=Transform2D.identity()
    )
    return replace(next_state, orbs=derive_orbs(next_state))


def _fold_dive_out(state: SceneState, event: SessionEvent) -> SceneState:
    user = replace(
        state.user,
        world_position=(0.0, 0.0),
        mode=Mode.overview(),
    )
    return replace(state, user=user, placement=None, orbs=())


def _fold_walk_teleport(state: SceneState, event: SessionEvent) -> SceneState:
    target_id = str(_require(event.payload, "target_island_id"))
    if state.island_by_id(target_id) is None:
        raise InvalidReference(f"teleport to unknown island {target_id!r}")
    placement = Transform2D(
        rotation=float(_require(event.payload, "rotation")),
        translation=tuple(float(v) for v in _require(event.payload, "translation")),  # type: ignore[arg-type]
    )
    unseen = dict(state.unseen)
    unseen[target_id] = 0
    # The user does not move: the target island is instantiated around them.
    user = replace(state.user, mode=Mode.immersed(target_id))
    next_state = replace(state, user=user, unseen=unseen, placement=placement)
    return replace(next_state, orbs=derive_orbs(next_state))


def _fold_pose_update(state: SceneState, event: SessionEvent) -> SceneState:
    room = _require(event.payload, "room")
    world = _require(event.payload, "world")
    user = replace(
        state.user,
        room_position=(float(room[0]), float(room[1])),
        world_position=(float(world[0]), float(world[1])),
        heading=float(_require(event.payload, "heading")),
    )
    return replace(state, user=user)


def _fold_inference_error(state: SceneState, event: SessionEvent) -> SceneState:
    utterance_id = str(_require(event.payload, "utterance_id"))
    if utterance_id not in state.utterance_ids:
        raise InvalidReference(f"inference error for unknown utterance {utterance_id!r}")
    return state


_FOLDERS = {
    EventKind.UTTERANCE_SUBMITTED: _fold_utterance_submitted,
    EventKind.CATEGORIZED: _fold_categorized,
    EventKind.ISLAND_CREATED: _fold_island_created,
    EventKind.TREE_ADDED: _fold_tree_added,
    EventKind.DIVE_IN: _fold_dive_in,
    EventKind.DIVE_OUT: _fold_dive_out,
    EventKind.WALK_TELEPORT: _fold_walk_teleport,
    EventKind.POSE_UPDATE: _fold_pose_update,
    EventKind.INFERENCE_ERROR: _fold_inference_error,
}


def fold_event(state: SceneState, event: SessionEvent) -> SceneState:
    """Apply one event and return the next immutable snapshot.

    Raises SequenceGap when the event does not directly follow the state's
    last sequence number, InvalidReference when it names unknown entities or
    breaks a uniqueness rule.
    """
    if event.seq != state.last_seq + 1:
        raise SequenceGap(
            f"expected seq {state.last_seq + 1}, got {event.seq}"
        )
    try:
        folder = _FOLDERS[EventKind(event.kind)]
    except (KeyError, ValueError):
        raise InvalidReference(f"unknown event kind {event.kind!r}") from None
    next_state = folder(state, event)
    return replace(next_state, last_seq=event.seq, last_t=max(state.last_t, event.t))


def fold_events(state: SceneState, events: Iterable[SessionEvent]) -> SceneState:
    for event in events:
        state = fold_event(state, event)
    return state
