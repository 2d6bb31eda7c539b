"""Quantitative measures over finished or snapshot session logs.

Everything here is a pure function of the event stream: idea counts per the
Guilford triple (fluency, flexibility, persistence), the context-switch
rate, spatial-semantic correspondence (SSC), temporal halves, and dwell
fractions. Replaying a log and recomputing always yields identical reports.

Idea location is the island the user was immersed in at utterance
*submission* time; ideas whose inference failed count toward nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import IncompletePartition, NonPositiveDuration
from .model import (
    CategoryLabel,
    EventKind,
    OVERVIEW_AREA,
    SessionEvent,
)
from .navigation import DwellSegment

_PARTITION_TOL = 1e-9


@dataclass(frozen=True)
class IdeaRecord:
    """One categorized idea with where and when it was produced."""

    utterance_id: str
    t: float
    category: CategoryLabel | None
    location_island_id: str | None  # None = produced in overview
    location_category: CategoryLabel | None
    originality: float | None = None

    @property
    def in_island(self) -> bool:
        return self.location_island_id is not None


@dataclass(frozen=True)
class GuilfordScores:
    fluency: int
    flexibility: int
    persistence: float


@dataclass(frozen=True)
class SscReport:
    """Spatial-semantic correspondence counts and rate.

    ``rate`` is None when no idea was produced inside an island.
    """

    matched: int
    in_island: int

    @property
    def rate(self) -> float | None:
        if self.in_island == 0:
            return None
        return self.matched / self.in_island


@dataclass(frozen=True)
class HalfReport:
    fluency: int
    flexibility: int
    persistence: float
    switch_rate_per_min: float


@dataclass(frozen=True)
class MetricsReport:
    duration_s: float
    fluency: int
    flexibility: int
    persistence: float
    switch_rate_per_min: float
    ssc: SscReport
    share_in_island: float | None
    overview_fraction: float
    first_half: HalfReport
    second_half: HalfReport
    originality_total: float | None = None

    def to_lines(self) -> list[str]:
        """Tabular text form, one ``name=value`` per line, stable ordering."""

        def fmt(value) -> str:
            if value is None:
                return "undefined"
            if isinstance(value, float):
                return f"{value:.6f}"
            return str(value)

        lines = [
            f"duration_s={fmt(self.duration_s)}",
            f"fluency={self.fluency}",
            f"flexibility={self.flexibility}",
            f"persistence={fmt(self.persistence)}",
            f"switch_rate_per_min={fmt(self.switch_rate_per_min)}",
            f"ssc_matched={self.ssc.matched}",
            f"ssc_in_island={self.ssc.in_island}",
            f"ssc_rate={fmt(self.ssc.rate)}",
            f"share_in_island={fmt(self.share_in_island)}",
            f"overview_fraction={fmt(self.overview_fraction)}",
        ]
        for name, half in (("first_half", self.first_half), ("second_half", self.second_half)):
            lines.append(f"{name}.fluency={half.fluency}")
            lines.append(f"{name}.flexibility={half.flexibility}")
            lines.append(f"{name}.persistence={fmt(half.persistence)}")
            lines.append(f"{name}.switch_rate_per_min={fmt(half.switch_rate_per_min)}")
        if self.originality_total is not None:
            lines.append(f"originality_total={fmt(self.originality_total)}")
        return lines

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    def to_dict(self) -> dict:
        return {
            "duration_s": self.duration_s,
            "fluency": self.fluency,
            "flexibility": self.flexibility,
            "persistence": self.persistence,
            "switch_rate_per_min": self.switch_rate_per_min,
            "ssc": {
                "matched": self.ssc.matched,
                "in_island": self.ssc.in_island,
                "rate": self.ssc.rate,
            },
            "share_in_island": self.share_in_island,
            "overview_fraction": self.overview_fraction,
            "first_half": vars(self.first_half).copy(),
            "second_half": vars(self.second_half).copy(),
            "originality_total": self.originality_total,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def guilford(ideas: Sequence[IdeaRecord]) -> GuilfordScores:
    """Fluency = idea count, flexibility = distinct categories, persistence =
    mean ideas per category (0 when empty)."""
    categorized = [i for i in ideas if i.category is not None]
    fluency = len(categorized)
    flexibility = len({i.category for i in categorized})
    persistence = fluency / flexibility if flexibility else 0.0
    return GuilfordScores(fluency, flexibility, persistence)


def switch_rate(ideas: Sequence[IdeaRecord], duration_s: float) -> float:
    """Adjacent category changes per minute over the idea sequence."""
    if duration_s <= 0:
        raise NonPositiveDuration(f"duration {duration_s}s")
    categories = [i.category for i in ideas if i.category is not None]
    switches = sum(1 for a, b in zip(categories, categories[1:]) if a != b)
    return switches / (duration_s / 60.0)


def ssc(ideas: Sequence[IdeaRecord]) -> SscReport:
    """Fraction of in-island ideas whose category matches the island they
    were generated in (normalized comparison)."""
    in_island = [i for i in ideas if i.in_island and i.category is not None]
    matched = sum(
        1
        for idea in in_island
        if idea.location_category is not None and idea.category == idea.location_category
    )
    return SscReport(matched=matched, in_island=len(in_island))


def temporal_halves(
    ideas: Sequence[IdeaRecord], duration_s: float
) -> tuple[HalfReport, HalfReport]:
    """Split at duration/2; an idea at exactly the boundary belongs to the
    second half. Each half reports its own Guilford triple and switch rate
    over the half duration."""
    if duration_s <= 0:
        raise NonPositiveDuration(f"duration {duration_s}s")
    midpoint = duration_s / 2.0
    first = [i for i in ideas if i.t < midpoint]
    second = [i for i in ideas if i.t >= midpoint]
    halves = []
    for subset in (first, second):
        g = guilford(subset)
        halves.append(
            HalfReport(
                fluency=g.fluency,
                flexibility=g.flexibility,
                persistence=g.persistence,
                switch_rate_per_min=switch_rate(subset, midpoint),
            )
        )
    return halves[0], halves[1]


def overview_fraction(segments: Sequence[DwellSegment]) -> float:
    """Share of session time spent in the overview.

    Segments must partition the timeline contiguously from its start.
    """
    if not segments:
        raise IncompletePartition("no dwell segments")
    ordered = sorted(segments, key=lambda s: s.start)
    cursor = ordered[0].start
    for segment in ordered:
        if abs(segment.start - cursor) > _PARTITION_TOL:
            raise IncompletePartition(
                f"gap or overlap at t={segment.start} (expected {cursor})"
            )
        if segment.end < segment.start:
            raise IncompletePartition(f"segment ends before it starts: {segment}")
        cursor = segment.end
    total = cursor - ordered[0].start
    if total <= 0:
        raise IncompletePartition("zero-length session")
    in_overview = sum(s.length for s in ordered if s.area == OVERVIEW_AREA)
    return in_overview / total


def immersed_fraction(segments: Sequence[DwellSegment]) -> float:
    return 1.0 - overview_fraction(segments)


# -- extraction from event logs ----------------------------------------------

def ideas_from_events(
    events: Iterable[SessionEvent],
    originality: dict[str, float] | None = None,
) -> tuple[IdeaRecord, ...]:
    """Build idea records from a session log.

    Location is captured at submission time; records are emitted in
    categorization order (which the engine keeps equal to submission order).
    Utterances that ended in an inference error yield no record.
    """
    originality = originality or {}
    island_categories: dict[str, CategoryLabel] = {}
    current_island: str | None = None
    pending: dict[str, tuple[float, str | None]] = {}
    records: list[IdeaRecord] = []
    for event in events:
        kind = EventKind(event.kind)
        if kind == EventKind.ISLAND_CREATED:
            island_categories[event.payload["island_id"]] = CategoryLabel(
                event.payload["category"]
            )
        elif kind == EventKind.DIVE_IN:
            current_island = event.payload["island_id"]
        elif kind == EventKind.WALK_TELEPORT:
            current_island = event.payload["target_island_id"]
        elif kind == EventKind.DIVE_OUT:
            current_island = None
        elif kind == EventKind.UTTERANCE_SUBMITTED:
            pending[event.payload["utterance_id"]] = (event.t, current_island)
        elif kind == EventKind.CATEGORIZED:
            utterance_id = event.payload["utterance_id"]
            submitted_t, location = pending.pop(utterance_id, (event.t, None))
            records.append(
                IdeaRecord(
                    utterance_id=utterance_id,
                    t=submitted_t,
                    category=CategoryLabel(event.payload["category"]),
                    location_island_id=location,
                    location_category=island_categories.get(location)
                    if location is not None
                    else None,
                    originality=originality.get(utterance_id),
                )
            )
        elif kind == EventKind.INFERENCE_ERROR:
            pending.pop(event.payload["utterance_id"], None)
    return tuple(records)


def dwell_segments_from_events(
    events: Iterable[SessionEvent], duration_s: float
) -> tuple[DwellSegment, ...]:
    """Reconstruct the dwell partition of [0, duration] from transitions."""
    segments: list[DwellSegment] = []
    area = OVERVIEW_AREA
    since = 0.0
    for event in events:
        kind = EventKind(event.kind)
        if kind == EventKind.DIVE_IN:
            next_area = event.payload["island_id"]
        elif kind == EventKind.WALK_TELEPORT:
            next_area = event.payload["target_island_id"]
        elif kind == EventKind.DIVE_OUT:
            next_area = OVERVIEW_AREA
        else:
            continue
        segments.append(DwellSegment(area, since, event.t))
        area, since = next_area, event.t
    segments.append(DwellSegment(area, since, max(duration_s, since)))
    return tuple(segments)


def compute_report(
    events: Sequence[SessionEvent],
    duration_s: float | None = None,
    originality: dict[str, float] | None = None,
) -> MetricsReport:
    """Full metrics report for one session log."""
    if duration_s is None:
        duration_s = events[-1].t if events else 0.0
    if duration_s <= 0:
        raise NonPositiveDuration(f"duration {duration_s}s")
    ideas = ideas_from_events(events, originality)
    g = guilford(ideas)
    first_half, second_half = temporal_halves(ideas, duration_s)
    correspondence = ssc(ideas)
    segments = dwell_segments_from_events(events, duration_s)
    scored = [i.originality for i in ideas if i.originality is not None]
    return MetricsReport(
        duration_s=duration_s,
        fluency=g.fluency,
        flexibility=g.flexibility,
        persistence=g.persistence,
        switch_rate_per_min=switch_rate(ideas, duration_s),
        ssc=correspondence,
        share_in_island=(
            correspondence.in_island / g.fluency if g.fluency else None
        ),
        overview_fraction=overview_fraction(segments),
        first_half=first_half,
        second_half=second_half,
        originality_total=sum(scored) if scored else None,
    )
