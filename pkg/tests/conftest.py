"""Shared fixtures: a deterministic keyword provider and session factories."""

from __future__ import annotations

import pytest

from ideascape.layout import DEFAULT_PARAMS, place_island
from ideascape.model import EventKind, SceneState, SessionEvent, fold_event
from ideascape.organizer import MockProvider
from ideascape.session import IdeationSession
from ideascape.topics import load_topic

KEYWORDS = {
    "elevator": ("Transportation & Mobility", "elevator usage reduction"),
    "patrol": ("Energy Saving", "night patrol waste prevention"),
    "window": ("Energy Saving", "upgrading poorly performing windows"),
    "recycle": ("Resource & Waste Management", "recycling stations"),
    "garden": ("Space Design & Greening", "garden design competition"),
    "meal": ("Eco-Friendly Diet", "balanced meal plans"),
    "mentor": ("Education & Campaign", "peer mentors"),
}


@pytest.fixture
def provider():
    return MockProvider(dict(KEYWORDS))


@pytest.fixture
def topic():
    return load_topic("study2-sustainability")


@pytest.fixture
def session(tmp_path, topic, provider):
    return IdeationSession(
        session_id="test",
        topic=topic,
        provider=provider,
        transition_mode="walk",
        log_path=tmp_path / "session.log",
    )


@pytest.fixture
def dive_session(tmp_path, topic, provider):
    return IdeationSession(
        session_id="test-dive",
        topic=topic,
        provider=provider,
        transition_mode="dive",
        log_path=tmp_path / "dive.log",
    )


def island_created_event(seq: int, t: float, island_id: str, category: str,
                         existing_count: int) -> SessionEvent:
    """Hand-built island event using the same placement the organizer uses."""
    pose = place_island(existing_count, DEFAULT_PARAMS)
    return SessionEvent(
        seq=seq,
        t=t,
        kind=EventKind.ISLAND_CREATED,
        payload={
            "island_id": island_id,
            "category": category,
            "cloud_label": category,
            "overview_pose": {"x": pose.x, "y": pose.y, "heading": pose.heading},
            "pathway": {"radius": DEFAULT_PARAMS.pathway_radius, "entry_angle": 0.0},
            "body_radius": DEFAULT_PARAMS.island_radius_body,
        },
    )


def utterance_event(seq: int, t: float, utterance_id: str, transcript: str) -> SessionEvent:
    return SessionEvent(
        seq=seq,
        t=t,
        kind=EventKind.UTTERANCE_SUBMITTED,
        payload={"utterance_id": utterance_id, "transcript": transcript},
    )


def tree_event(seq: int, t: float, island_id: str, tree_id: str,
               utterance_id: str, slot: int) -> SessionEvent:
    return SessionEvent(
        seq=seq,
        t=t,
        kind=EventKind.TREE_ADDED,
        payload={
            "island_id": island_id,
            "tree_id": tree_id,
            "utterance_id": utterance_id,
            "summary": "a summary",
            "slot": slot,
        },
    )


def build_state(*events: SessionEvent, transition_mode: str = "walk") -> SceneState:
    state = SceneState.initial("study2-sustainability", transition_mode)
    for event in events:
        state = fold_event(state, event)
    return state
