"""Real-time engine that externalizes a stream of ideas into an explorable
island landscape, with deterministic replay and creativity metrics."""

from .errors import EngineError
from .geometry import Pose, Transform2D
from .layout import LayoutParams, RoomMapping, place_island, place_orbs, place_tree
from .model import (
    CategoryLabel,
    EventKind,
    Island,
    Mode,
    Orb,
    OVERFLOW_SLOT,
    SceneState,
    SessionEvent,
    Tree,
    UserPose,
    Utterance,
    fold_event,
    fold_events,
)
from .metrics import MetricsReport, compute_report
from .navigation import NavState, VisibilityRule, signpost_visible
from .organizer import (
    InferenceRequest,
    MockProvider,
    SemanticOrganizer,
    TopicConfig,
    build_prompt,
    parse_output,
)
from .session import IdeationSession
from .sessionlog import SessionLogWriter, read_session, replay
from .topics import PRESET_NAMES, load_topic

__version__ = "0.1.0"

__all__ = [
    "CategoryLabel",
    "EngineError",
    "EventKind",
    "IdeationSession",
    "InferenceRequest",
    "Island",
    "LayoutParams",
    "MetricsReport",
    "MockProvider",
    "Mode",
    "NavState",
    "Orb",
    "OVERFLOW_SLOT",
    "Pose",
    "PRESET_NAMES",
    "RoomMapping",
    "SceneState",
    "SemanticOrganizer",
    "SessionEvent",
    "SessionLogWriter",
    "Transform2D",
    "Tree",
    "TopicConfig",
    "UserPose",
    "Utterance",
    "VisibilityRule",
    "build_prompt",
    "compute_report",
    "fold_event",
    "fold_events",
    "load_topic",
    "parse_output",
    "place_island",
    "place_orbs",
    "place_tree",
    "read_session",
    "replay",
    "signpost_visible",
]
