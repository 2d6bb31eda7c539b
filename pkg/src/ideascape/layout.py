"""All geometry: island placement, tree slots, orb anchors, scale mappings,
and the teleport alignment transform.

Placement functions are pure; identical inputs give identical poses.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import DegenerateMapping, NotImmersed, SlotOutOfRange
from .geometry import Pose, Transform2D, Vec2, add, align_entry, rotate, scale, sub
from .model import Island, Orb, SceneState, SLOTS_PER_ISLAND, UserPose, derive_orbs

SLOT_ANGLE = math.pi / 4.0  # 45 degree spacing, creation-order filling

# Trees stand just outside the pathway loop, signposts facing it.
TREE_RING_MARGIN = 0.15  # fraction of the island body radius


@dataclass(frozen=True)
class LayoutParams:
    """Calibrated sizes for the whole landscape. Distances in metres, angles
    in radians."""

    island_radius_body: float = 2.5
    island_radius_mini: float = 0.35
    pathway_radius_ratio: float = 0.6
    slots_per_island: int = SLOTS_PER_ISLAND
    overview_ring_radius: float = 1.2
    orb_activation_radius: float = 0.5

    def __post_init__(self):
        for name in (
            "island_radius_body",
            "island_radius_mini",
            "pathway_radius_ratio",
            "overview_ring_radius",
            "orb_activation_radius",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.slots_per_island != SLOTS_PER_ISLAND:
            raise ValueError("slots_per_island is fixed at 8")

    @property
    def pathway_radius(self) -> float:
        return self.pathway_radius_ratio * self.island_radius_body

    @property
    def tree_ring_radius(self) -> float:
        return self.pathway_radius + TREE_RING_MARGIN * self.island_radius_body

    @classmethod
    def from_file(cls, path: str | Path) -> "LayoutParams":
        """Load ``key = value`` lines; '#' starts a comment, unknown keys are
        rejected."""
        values: dict[str, float] = {}
        known = {f.name for f in fields(cls)}
        for raw_line in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad layout params line: {raw_line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"unknown layout param {key!r}")
            values[key] = int(value) if key == "slots_per_island" else float(value)
        return cls(**values)  # type: ignore[arg-type]


def params_hash(params: LayoutParams) -> str:
    """Stable digest of the layout configuration, recorded in log headers."""
    canonical = "\n".join(
        f"{f.name}={getattr(params, f.name)!r}" for f in fields(LayoutParams)
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


DEFAULT_PARAMS = LayoutParams()


def place_island(existing_count: int, params: LayoutParams = DEFAULT_PARAMS) -> Pose:
    """Overview pose for the next island.

    Island k sits on a ring of radius ``overview_ring_radius`` at angle
    k * 45 degrees; from the 9th island on, a second ring at 1.8x radius is
    used with a 22.5 degree stagger.
    """
    if existing_count < 0:
        raise ValueError("existing_count must be >= 0")
    k = existing_count
    if k < 8:
        radius = params.overview_ring_radius
        angle = k * SLOT_ANGLE
    else:
        radius = 1.8 * params.overview_ring_radius
        angle = (k - 8) * SLOT_ANGLE + SLOT_ANGLE / 2.0
    return Pose(radius * math.cos(angle), radius * math.sin(angle), angle)


def place_tree(slot: int, params: LayoutParams = DEFAULT_PARAMS) -> Pose:
    """Island-local pose for a slot: just outside the pathway loop at
    slot * 45 degrees, signpost facing the loop."""
    if not 0 <= slot < params.slots_per_island:
        raise SlotOutOfRange(f"slot {slot} outside 0..{params.slots_per_island - 1}")
    angle = slot * SLOT_ANGLE
    radius = params.tree_ring_radius
    # Trees face inward so their signposts front the pathway.
    return Pose(radius * math.cos(angle), radius * math.sin(angle), angle + math.pi)


def tree_world_pose(island_placement: Transform2D, slot: int,
                    params: LayoutParams = DEFAULT_PARAMS) -> Pose:
    """World pose of a slot inside the currently placed island."""
    local = place_tree(slot, params)
    x, y = island_placement.apply((local.x, local.y))
    return Pose(x, y, island_placement.apply_heading(local.heading))


def place_orbs(state: SceneState, transition_mode: str) -> tuple[Orb, ...]:
    """Orbs for every non-current island while immersed.

    Walk mode anchors each orb on the pathway loop toward the target
    island's overview bearing; dive mode anchors at the island edge on the
    same bearing. Orbs carry pulse counts of unseen ideas.
    """
    if not state.mode.is_immersed:
        raise NotImmersed("orbs exist only in immersive mode")
    if transition_mode not in ("walk", "dive"):
        raise ValueError("transition_mode must be 'walk' or 'dive'")
    return derive_orbs(state, transition_mode)


def align_for_teleport(target: Island, user: UserPose) -> Transform2D:
    """World transform for the target island after a walk-teleport.

    Maps the target pathway's entry point onto the user's current world
    position and its entry tangent onto the user's heading; the user does
    not move.
    """
    return align_entry(
        target.pathway.entry_point,
        target.pathway.entry_tangent,
        user.world_position,
        user.heading,
    )


@dataclass(frozen=True)
class RoomMapping:
    """Affine tracking-space to world mapping: rotate, scale, then offset.

    Recentred at every scale transition so the physical room stays usable.
    """

    mode_kind: str  # "overview" | "immersed"
    origin_offset: Vec2 = (0.0, 0.0)
    scale_factor: float = 1.0
    rotation: float = 0.0

    def __post_init__(self):
        if self.scale_factor == 0:
            raise DegenerateMapping("scale_factor must be non-zero")


def room_to_world(mapping: RoomMapping, room_point: Vec2) -> Vec2:
    return add(scale(rotate(room_point, mapping.rotation), mapping.scale_factor),
               mapping.origin_offset)


def world_to_room(mapping: RoomMapping, world_point: Vec2) -> Vec2:
    if mapping.scale_factor == 0:
        raise DegenerateMapping("scale_factor must be non-zero")
    unscaled = scale(sub(world_point, mapping.origin_offset), 1.0 / mapping.scale_factor)
    return rotate(unscaled, -mapping.rotation)


def mapping_for_dive_in(room_position: Vec2, entry_world: Vec2) -> RoomMapping:
    """Immersed mapping that sends the user's current room position onto the
    island's pathway entry."""
    return RoomMapping(
        mode_kind="immersed",
        origin_offset=sub(entry_world, room_position),
    )


def mapping_for_overview(room_position: Vec2, vantage: Vec2 = (0.0, 0.0)) -> RoomMapping:
    """Overview mapping that recentres the room onto the landscape vantage."""
    return RoomMapping(
        mode_kind="overview",
        origin_offset=sub(vantage, room_position),
    )
