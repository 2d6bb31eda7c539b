"""Dual-scale navigation: the overview/immersive state machine, the three
transition actions, perspective-dependent visibility, and dwell tracking.

Every action validates its guard, switches the dwell segment, recentres the
room mapping where the transition demands it, and returns the event to be
folded and logged. NavState itself is immutable; each action returns the
successor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import (
    NotImmersed,
    NotInOverview,
    OrbOutOfRange,
    TimeRegression,
    UnknownIsland,
)
from .geometry import Vec2, angle_diff, bearing, dist
from .layout import (
    LayoutParams,
    DEFAULT_PARAMS,
    RoomMapping,
    align_for_teleport,
    mapping_for_dive_in,
    mapping_for_overview,
    room_to_world,
)
from .model import (
    EventKind,
    Mode,
    OVERVIEW_AREA,
    SceneState,
    SessionEvent,
    UserPose,
)

# Pose events are throttled to at most one per this interval in the log.
POSE_LOG_INTERVAL_S = 0.1

# Renderer hint for the old island fading out during a walk-teleport.
FADE_OUT_HINT_S = 0.8


@dataclass(frozen=True)
class VisibilityRule:
    """Signpost reveal window: close enough and faced directly enough."""

    max_distance: float = 1.5
    max_facing_angle: float = math.radians(30.0)

    def __post_init__(self):
        if self.max_distance <= 0 or self.max_facing_angle <= 0:
            raise ValueError("visibility thresholds must be positive")


@dataclass(frozen=True)
class DwellSegment:
    """Contiguous stay in one area: an island id or the overview."""

    area: str
    start: float
    end: float

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class NavState:
    """Live navigation bookkeeping for one session."""

    mode: Mode
    mapping: RoomMapping
    closed_segments: tuple[DwellSegment, ...]
    open_area: str
    open_since: float
    last_pose_t: float
    last_logged_pose_t: float

    @classmethod
    def initial(cls, t0: float = 0.0) -> "NavState":
        return cls(
            mode=Mode.overview(),
            mapping=mapping_for_overview((0.0, 0.0)),
            closed_segments=(),
            open_area=OVERVIEW_AREA,
            open_since=t0,
            last_pose_t=t0,
            last_logged_pose_t=-math.inf,
        )

    def dwell_segments(self, now: float) -> tuple[DwellSegment, ...]:
        """Closed segments plus the still-open one, ending at ``now``."""
        open_segment = DwellSegment(self.open_area, self.open_since, max(now, self.open_since))
        return self.closed_segments + (open_segment,)

    def _switch_area(self, area: str, t: float) -> "NavState":
        closed = self.closed_segments + (
            DwellSegment(self.open_area, self.open_since, t),
        )
        return replace(self, closed_segments=closed, open_area=area, open_since=t)


def dive_in(
    nav: NavState, scene: SceneState, island_id: str, t: float
) -> tuple[NavState, SessionEvent]:
    """Enlarge one island to body scale from the overview."""
    if not nav.mode.is_overview:
        raise NotInOverview("dive-in requires overview mode")
    island = scene.island_by_id(island_id)
    if island is None:
        raise UnknownIsland(f"no island {island_id!r}")
    mapping = mapping_for_dive_in(scene.user.room_position, island.pathway.entry_point)
    nav = replace(
        nav._switch_area(island_id, t),
        mode=Mode.immersed(island_id),
        mapping=mapping,
    )
    event = SessionEvent(
        seq=scene.last_seq + 1,
        t=t,
        kind=EventKind.DIVE_IN,
        payload={"island_id": island_id},
    )
    return nav, event


def dive_out(nav: NavState, scene: SceneState, t: float) -> tuple[NavState, SessionEvent]:
    """Return to the mini-scale overview; island poses are untouched."""
    if not nav.mode.is_immersed:
        raise NotImmersed("dive-out requires immersive mode")
    mapping = mapping_for_overview(scene.user.room_position)
    nav = replace(
        nav._switch_area(OVERVIEW_AREA, t),
        mode=Mode.overview(),
        mapping=mapping,
    )
    event = SessionEvent(
        seq=scene.last_seq + 1,
        t=t,
        kind=EventKind.DIVE_OUT,
        payload={},
    )
    return nav, event


def walk_teleport(
    nav: NavState,
    scene: SceneState,
    orb_id: str,
    t: float,
    params: LayoutParams = DEFAULT_PARAMS,
) -> tuple[NavState, SessionEvent]:
    """Swap the surrounding island for the orb's target.

    The user must stand within the activation radius of the orb. The target
    island is instantiated around them, its pathway entry pinned to their
    current position and heading; the previous island fades out (renderer
    hint in the payload). The user's pose does not change.
    """
    if not nav.mode.is_immersed:
        raise NotImmersed("walk-teleport requires immersive mode")
    orb = next((o for o in scene.orbs if o.target_island_id == orb_id), None)
    if orb is None:
        raise OrbOutOfRange(f"no orb for island {orb_id!r}")
    gap = dist(scene.user.world_position, orb.pose)
    if gap > params.orb_activation_radius:
        raise OrbOutOfRange(
            f"orb {orb_id!r} is {gap:.2f} m away, activation radius "
            f"{params.orb_activation_radius} m"
        )
    target = scene.island_by_id(orb_id)
    if target is None:
        raise UnknownIsland(f"no island {orb_id!r}")
    transform = align_for_teleport(target, scene.user)
    nav = replace(nav._switch_area(orb_id, t), mode=Mode.immersed(orb_id))
    event = SessionEvent(
        seq=scene.last_seq + 1,
        t=t,
        kind=EventKind.WALK_TELEPORT,
        payload={
            "target_island_id": orb_id,
            "orb_id": orb_id,
            "rotation": transform.rotation,
            "translation": list(transform.translation),
            "faded_island_id": nav.closed_segments[-1].area,
            "fade_s": FADE_OUT_HINT_S,
        },
    )
    return nav, event


def update_pose(
    nav: NavState,
    scene: SceneState,
    room_position: Vec2,
    heading: float,
    t: float,
) -> tuple[NavState, list[SessionEvent]]:
    """Record a tracked pose; log it only when the throttle window elapsed."""
    if t < nav.last_pose_t:
        raise TimeRegression(f"pose at t={t} precedes t={nav.last_pose_t}")
    world = room_to_world(nav.mapping, room_position)
    events: list[SessionEvent] = []
    logged_t = nav.last_logged_pose_t
    if t - nav.last_logged_pose_t >= POSE_LOG_INTERVAL_S:
        events.append(
            SessionEvent(
                seq=scene.last_seq + 1,
                t=t,
                kind=EventKind.POSE_UPDATE,
                payload={
                    "room": [room_position[0], room_position[1]],
                    "world": [world[0], world[1]],
                    "heading": heading,
                },
            )
        )
        logged_t = t
    nav = replace(nav, last_pose_t=t, last_logged_pose_t=logged_t)
    return nav, events


def signpost_visible(user: UserPose, signpost_position: Vec2, rule: VisibilityRule) -> bool:
    """Reveal rule for idea content.

    Immersed: visible iff the signpost is within ``max_distance`` and the
    user faces it within ``max_facing_angle``. Overview: pop-ups are
    unconditionally visible.
    """
    if user.mode.is_overview:
        return True
    gap = dist(user.world_position, signpost_position)
    if gap > rule.max_distance:
        return False
    if gap == 0.0:
        return True
    toward = bearing(user.world_position, signpost_position)
    return angle_diff(user.heading, toward) <= rule.max_facing_angle
