"""Bundled topic presets and the loader for custom topic files."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .organizer import TopicConfig

PRESET_FILES = {
    "study1-communication": "study1_communication.json",
    "study1-health": "study1_health.json",
    "study2-sustainability": "study2_sustainability.json",
}

PRESET_NAMES = tuple(PRESET_FILES)


def load_topic(name_or_path: str) -> TopicConfig:
    """Load a bundled preset by name, or any topic config JSON by path."""
    filename = PRESET_FILES.get(name_or_path)
    if filename is not None:
        data = (
            resources.files("ideascape").joinpath("topic_data", filename).read_text("utf-8")
        )
        return TopicConfig.from_dict(json.loads(data))
    path = Path(name_or_path)
    if path.exists():
        return TopicConfig.from_file(path)
    raise ValueError(
        f"unknown topic {name_or_path!r}; presets: {', '.join(PRESET_NAMES)}"
    )
