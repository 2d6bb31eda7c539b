"""Engine error taxonomy.

Every guard failure the engine can produce is a named exception so that the
wire layer can surface them as stable error codes. The code for an error is
its class name.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-level failures."""

    @property
    def code(self) -> str:
        return type(self).__name__


# -- event folding ----------------------------------------------------------

class SequenceGap(EngineError):
    """Event sequence number does not follow the previous one."""


class InvalidReference(EngineError):
    """Event names an unknown island/utterance, or violates a uniqueness rule."""


# -- semantic organization --------------------------------------------------

class EmptyTranscript(EngineError):
    """Utterance transcript is empty after trimming."""


class MissingDelimiter(EngineError):
    """Provider output has no category/summary separator."""


class EmptySegment(EngineError):
    """Provider output has an empty category or summary half."""


class ProviderTimeout(EngineError):
    """Inference provider did not answer within the deadline, retry included."""


class ParseFailure(EngineError):
    """Provider output stayed unparseable after the repair retry."""


# -- layout -----------------------------------------------------------------

class SlotOutOfRange(EngineError):
    """Tree slot outside 0..7; overflow trees are never placed."""


class DegenerateMapping(EngineError):
    """Room-to-world mapping is not invertible."""


# -- navigation -------------------------------------------------------------

class NotInOverview(EngineError):
    """Action requires overview mode."""


class NotImmersed(EngineError):
    """Action requires immersive mode."""


class UnknownIsland(EngineError):
    """No island with the requested id."""


class OrbOutOfRange(EngineError):
    """Trigger fired with no orb within the activation radius."""


class TimeRegression(EngineError):
    """Pose timestamp precedes the last recorded one."""


# -- metrics ----------------------------------------------------------------

class NonPositiveDuration(EngineError):
    """Rates need a positive session duration."""


class IncompletePartition(EngineError):
    """Dwell segments do not partition the session timeline."""


# -- session log ------------------------------------------------------------

class StorageFailure(EngineError):
    """Append could not be made durable."""


class CorruptLine(EngineError):
    """Session file line failed to parse."""

    def __init__(self, line_number: int, detail: str):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number
        self.detail = detail


# -- service ----------------------------------------------------------------

class UnknownSession(EngineError):
    """No session with the requested id."""


class MalformedMessage(EngineError):
    """Client message failed to decode or misses required fields."""


class SessionEnded(EngineError):
    """Session was ended; it only serves snapshots and metrics."""
