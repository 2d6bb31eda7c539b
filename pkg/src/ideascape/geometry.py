"""Planar geometry helpers shared by layout, navigation, and the scene fold.

Conventions: positions are metres on the ground plane as ``(x, y)`` tuples,
angles are radians measured counter-clockwise from +x. Pure math only, no
domain types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec2 = tuple[float, float]

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


def angle_diff(a: float, b: float) -> float:
    """Smallest absolute difference between two angles, in [0, pi]."""
    return abs(wrap_angle(a - b))


def from_angle(theta: float) -> Vec2:
    return (math.cos(theta), math.sin(theta))


def add(a: Vec2, b: Vec2) -> Vec2:
    return (a[0] + b[0], a[1] + b[1])


def sub(a: Vec2, b: Vec2) -> Vec2:
    return (a[0] - b[0], a[1] - b[1])


def scale(v: Vec2, k: float) -> Vec2:
    return (v[0] * k, v[1] * k)


# sqrt(x*x + y*y) instead of hypot: sqrt is correctly rounded everywhere, so
# scene folds reproduce bit-for-bit in clients written in other runtimes.
def norm(v: Vec2) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1])


def dist(a: Vec2, b: Vec2) -> float:
    dx, dy = a[0] - b[0], a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def unit(v: Vec2) -> Vec2:
    """Direction of v; +x when v is the zero vector."""
    n = norm(v)
    if n == 0.0:
        return (1.0, 0.0)
    return (v[0] / n, v[1] / n)


def rotate(v: Vec2, theta: float) -> Vec2:
    c, s = math.cos(theta), math.sin(theta)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def bearing(frm: Vec2, to: Vec2) -> float:
    """Angle of the direction from one point toward another."""
    return math.atan2(to[1] - frm[1], to[0] - frm[0])


@dataclass(frozen=True)
class Pose:
    """Position plus heading."""

    x: float
    y: float
    heading: float = 0.0

    @property
    def position(self) -> Vec2:
        return (self.x, self.y)


@dataclass(frozen=True)
class Transform2D:
    """Rigid transform: rotate by ``rotation`` then translate."""

    rotation: float
    translation: Vec2

    @classmethod
    def identity(cls) -> "Transform2D":
        return cls(0.0, (0.0, 0.0))

    def apply(self, p: Vec2) -> Vec2:
        return add(rotate(p, self.rotation), self.translation)

    def apply_heading(self, h: float) -> float:
        return wrap_angle(h + self.rotation)


def align_entry(
    entry_local: Vec2,
    entry_tangent: float,
    target_position: Vec2,
    target_heading: float,
) -> Transform2D:
    """Rigid transform that pins a local entry point onto a target pose.

    The returned transform maps ``entry_local`` exactly onto
    ``target_position`` and rotates the local tangent direction onto
    ``target_heading``.
    """
    theta = wrap_angle(target_heading - entry_tangent)
    moved = rotate(entry_local, theta)
    return Transform2D(theta, sub(target_position, moved))
