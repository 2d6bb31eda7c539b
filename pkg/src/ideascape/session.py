"""Live session runtime.

Glues the organizer, navigation, fold, and log together behind one lock:
inference for distinct utterances may run concurrently, but results are
applied strictly in submission order (a reordering buffer holds early
finishers), and every applied event is logged before listeners see it.

All methods take explicit session-relative times so drivers, tests, and the
synthetic generator can script timelines deterministically.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import EmptyTranscript, SessionEnded
from .layout import LayoutParams, DEFAULT_PARAMS, params_hash
from .model import EventKind, SceneState, SessionEvent, Utterance
from .navigation import NavState, dive_in, dive_out, update_pose, walk_teleport
from .organizer import OrganizeOutcome, SemanticOrganizer, TopicConfig, InferenceProvider
from .sessionlog import SessionHeader, SessionLogWriter

Listener = Callable[[list[SessionEvent]], None]


@dataclass
class UtteranceTicket:
    """Order marker handed out at submission; completion applies in ticket
    order no matter when inference finishes.

    Carries the state snapshot from submission time: the prompt's category
    list is frozen there, while create-vs-reuse is decided later, at apply
    time.
    """

    index: int
    utterance: Utterance
    state_at_submit: SceneState


@dataclass
class _PendingSlot:
    outcome: OrganizeOutcome | None = None
    done: bool = False


@dataclass
class IdeationSession:
    """One user's landscape, event log, and navigation state."""

    session_id: str
    topic: TopicConfig
    provider: InferenceProvider
    params: LayoutParams = field(default_factory=lambda: DEFAULT_PARAMS)
    transition_mode: str = "dive"
    log_path: str | Path | None = None

    def __post_init__(self):
        self.state = SceneState.initial(self.topic.id, self.transition_mode)
        self.nav = NavState.initial()
        self.organizer = SemanticOrganizer(self.topic, self.provider, self.params)
        self.events: list[SessionEvent] = []
        self._lock = threading.RLock()
        self._listeners: list[Listener] = []
        self._utterance_count = 0
        self._next_ticket = 0
        self._apply_cursor = 0
        self._pending: dict[int, _PendingSlot] = {}
        self._ended = False
        self._writer: SessionLogWriter | None = None
        if self.log_path is not None:
            header = SessionHeader(
                topic_config_id=self.topic.id,
                transition_mode=self.transition_mode,
                layout_params_hash=params_hash(self.params),
                started_at=datetime.now(timezone.utc).isoformat(),
            )
            self._writer = SessionLogWriter(self.log_path, header)

    # -- listeners ------------------------------------------------------------

    def add_listener(self, listener: Listener) -> None:
        with self._lock:
            self._listeners.append(listener)

    def subscribe(self, listener: Listener) -> SceneState:
        """Atomically register a listener and return the state it starts
        from: every event after the returned snapshot reaches the listener."""
        with self._lock:
            self._listeners.append(listener)
            return self.state

    def unsubscribe(self, listener: Listener) -> None:
        with self._lock:
            if listener in self._listeners:
                self._listeners.remove(listener)

    def _commit(self, events: list[SessionEvent]) -> None:
        """Log, fold, and broadcast; caller holds the lock."""
        from .model import fold_event

        for event in events:
            if self._writer is not None:
                self._writer.append(event)
            self.state = fold_event(self.state, event)
            self.events.append(event)
        if events:
            for listener in list(self._listeners):
                listener(events)

    def _check_open(self) -> None:
        if self._ended:
            raise SessionEnded(f"session {self.session_id!r} has ended")

    # -- utterances -----------------------------------------------------------

    def begin_utterance(self, transcript: str, t: float) -> UtteranceTicket:
        """Record a submission and hand out its order ticket."""
        if not transcript.strip():
            raise EmptyTranscript("utterance transcript is empty")
        with self._lock:
            self._check_open()
            self._utterance_count += 1
            utterance = Utterance(
                id=f"utt-{self._utterance_count:04d}", t=t, transcript=transcript
            )
            ticket = UtteranceTicket(self._next_ticket, utterance, self.state)
            self._next_ticket += 1
            self._pending[ticket.index] = _PendingSlot()
            event = SessionEvent(
                seq=self.state.last_seq + 1,
                t=t,
                kind=EventKind.UTTERANCE_SUBMITTED,
                payload={"utterance_id": utterance.id, "transcript": transcript},
            )
            self._commit([event])
            return ticket

    def categorize(self, ticket: UtteranceTicket) -> OrganizeOutcome:
        """Provider call for one ticket; safe to run outside the lock and
        concurrently with other tickets."""
        return self.organizer.categorize(ticket.utterance, ticket.state_at_submit)

    def complete_utterance(
        self, ticket: UtteranceTicket, outcome: OrganizeOutcome
    ) -> list[SessionEvent]:
        """Hand back an inference result; applies every consecutive finished
        ticket starting at the order cursor and returns the applied events.

        Results landing after the session ended are dropped: the log is
        sealed, and a sealed session mutates nothing.
        """
        with self._lock:
            if self._ended:
                self._pending.pop(ticket.index, None)
                return []
            slot = self._pending[ticket.index]
            slot.outcome = outcome
            slot.done = True
            applied: list[SessionEvent] = []
            while True:
                nxt = self._pending.get(self._apply_cursor)
                if nxt is None or not nxt.done:
                    break
                assert nxt.outcome is not None
                _, events = self.organizer.apply(nxt.outcome, self.state)
                self._commit(events)
                applied.extend(events)
                del self._pending[self._apply_cursor]
                self._apply_cursor += 1
            return applied

    def submit_utterance(self, transcript: str, t: float) -> list[SessionEvent]:
        """Synchronous submit: inference runs inline, events apply at once."""
        ticket = self.begin_utterance(transcript, t)
        outcome = self.categorize(ticket)
        return self.complete_utterance(ticket, outcome)

    # -- navigation -------------------------------------------------------------

    def dive_in(self, island_id: str, t: float) -> list[SessionEvent]:
        with self._lock:
            self._check_open()
            self.nav, event = dive_in(self.nav, self.state, island_id, t)
            self._commit([event])
            return [event]

    def dive_out(self, t: float) -> list[SessionEvent]:
        with self._lock:
            self._check_open()
            self.nav, event = dive_out(self.nav, self.state, t)
            self._commit([event])
            return [event]

    def trigger_orb(self, orb_id: str, t: float) -> list[SessionEvent]:
        with self._lock:
            self._check_open()
            self.nav, event = walk_teleport(
                self.nav, self.state, orb_id, t, self.params
            )
            self._commit([event])
            return [event]

    def update_pose(
        self, room_position: tuple[float, float], heading: float, t: float
    ) -> list[SessionEvent]:
        with self._lock:
            self._check_open()
            self.nav, events = update_pose(
                self.nav, self.state, room_position, heading, t
            )
            self._commit(events)
            return events

    # -- lifecycle ----------------------------------------------------------------

    def end(self, t: float) -> None:
        """Seal the session: close the log; snapshots and metrics stay
        available."""
        with self._lock:
            if self._ended:
                return
            self._ended = True
            self.end_t = t
            if self._writer is not None:
                self._writer.close()

    @property
    def ended(self) -> bool:
        return self._ended

    def snapshot(self) -> SceneState:
        with self._lock:
            return self.state

    def dwell_segments(self, now: float):
        with self._lock:
            return self.nav.dwell_segments(now)
