"""Semantic organization of utterances into the landscape.

Builds the few-shot prompt around the live category list, calls a pluggable
inference provider, parses the single-line ``CATEGORY;SUMMARY`` answer, and
decides whether the category gets a new island or a tree on an existing one.

Provider contract: request is UTF-8 prompt text (plus the raw transcript for
deterministic test doubles), response is a single UTF-8 line, and every call
has a deadline. The organizer retries a timed-out call once and retries a
malformed answer once with the format rule restated; after that it emits an
``inference_error`` event and leaves the landscape untouched.
"""

from __future__ import annotations

import json
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .errors import (
    EmptySegment,
    EmptyTranscript,
    MissingDelimiter,
    ParseFailure,
    ProviderTimeout,
)
from .layout import LayoutParams, DEFAULT_PARAMS, place_island
from .model import (
    CategoryLabel,
    EventKind,
    SceneState,
    SessionEvent,
    Utterance,
    OVERFLOW_SLOT,
)

# Restated when retrying after a malformed provider answer.
FORMAT_RULE = 'Output must be "CATEGORY;SUMMARY".'

CATEGORY_WORDS_MAX = 3
SUMMARY_WORDS_MAX = 5

# Per-call deadline and retry budget for provider calls.
DEFAULT_CALL_DEADLINE_S = 2.5


@dataclass(frozen=True)
class FewShotExample:
    topic: str
    categories: tuple[str, ...]
    transcript: str
    output: str


@dataclass(frozen=True)
class TopicConfig:
    """Prompt template for one ideation topic: prefix text, seed categories,
    and few-shot examples."""

    id: str
    topic_name: str
    prefix_rules: str
    seed_categories: tuple[CategoryLabel, ...]
    few_shot_examples: tuple[FewShotExample, ...]

    def __post_init__(self):
        if not self.few_shot_examples:
            raise ValueError("topic config needs at least one few-shot example")
        seen = set()
        for cat in self.seed_categories:
            if cat.normalized in seen:
                raise ValueError(f"duplicate seed category {cat.display!r}")
            seen.add(cat.normalized)

    @classmethod
    def from_dict(cls, data: dict) -> "TopicConfig":
        return cls(
            id=str(data["id"]),
            topic_name=str(data["topic_name"]),
            prefix_rules=str(data["prefix_rules"]),
            seed_categories=tuple(CategoryLabel(c) for c in data["seed_categories"]),
            few_shot_examples=tuple(
                FewShotExample(
                    topic=str(ex["topic"]),
                    categories=tuple(str(c) for c in ex["categories"]),
                    transcript=str(ex["transcript"]),
                    output=str(ex["output"]),
                )
                for ex in data["few_shot_examples"]
            ),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "TopicConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class InferenceRequest:
    """Rendered prompt plus the raw transcript it embeds."""

    prompt: str
    transcript: str


@dataclass(frozen=True)
class ParsedOutput:
    category: CategoryLabel
    summary: str
    flags: tuple[str, ...]


@dataclass(frozen=True)
class OrganizeResult:
    category: CategoryLabel
    summary: str
    island_action: str  # "created" | "reused"
    flags: tuple[str, ...]


class InferenceProvider(Protocol):
    def infer(self, request: InferenceRequest, timeout_s: float) -> str:
        """Return the single-line answer, raising TimeoutError on deadline."""
        ...


def merged_categories(
    seeds: tuple[CategoryLabel, ...], live: list[CategoryLabel]
) -> list[CategoryLabel]:
    """Seed list superseded and extended by the live categories.

    Seeds keep their order; a live category matching a seed replaces its
    display form; the rest follow in creation order.
    """
    live_by_norm = {c.normalized: c for c in live}
    merged = [live_by_norm.get(seed.normalized, seed) for seed in seeds]
    seed_norms = {seed.normalized for seed in seeds}
    merged.extend(c for c in live if c.normalized not in seed_norms)
    return merged


def build_prompt(
    config: TopicConfig,
    current_categories: list[CategoryLabel],
    transcript: str,
) -> str:
    """Render the full inference prompt for one transcript.

    Contains, verbatim: the prefix rules (which carry the output format
    rule), every few-shot example, the merged current category list, and the
    transcript itself.
    """
    if not transcript.strip():
        raise EmptyTranscript("cannot build a prompt for an empty transcript")
    lines: list[str] = [config.prefix_rules, "", "Examples:"]
    for example in config.few_shot_examples:
        lines.append("")
        lines.append(f"Topic: {example.topic}")
        lines.append(f"Known categories: {', '.join(example.categories)}")
        lines.append(f'Transcript: "{example.transcript}"')
        lines.append(f"Output: {example.output}")
    lines.append("")
    lines.append(f"Topic: {config.topic_name}")
    lines.append("Current categories:")
    for category in merged_categories(config.seed_categories, current_categories):
        lines.append(f"- {category.display}")
    lines.append("")
    lines.append(f'Transcript: "{transcript}"')
    lines.append("Output:")
    return "\n".join(lines)


def parse_output(raw: str) -> ParsedOutput:
    """Split a provider answer on its first semicolon.

    Word counts outside 1-3 (category) and 1-5 (summary) are flagged, not
    rejected; empty halves are rejected.
    """
    if ";" not in raw:
        raise MissingDelimiter(f"no semicolon in provider output {raw!r}")
    category_text, summary = (part.strip() for part in raw.split(";", 1))
    if not category_text:
        raise EmptySegment("empty category before the semicolon")
    if not summary:
        raise EmptySegment("empty summary after the semicolon")
    category = CategoryLabel(category_text)
    flags = []
    if category.word_count > CATEGORY_WORDS_MAX:
        flags.append("category_word_count")
    if len(summary.split()) > SUMMARY_WORDS_MAX:
        flags.append("summary_word_count")
    return ParsedOutput(category, summary, tuple(flags))


def format_output(category: CategoryLabel, summary: str) -> str:
    return f"{category.display};{summary}"


# -- providers ---------------------------------------------------------------

def mock_inference(
    transcript: str,
    keyword_table: dict[str, tuple[str, str | None]],
    fallback: str = "General;{head}",
) -> str:
    """Deterministic provider double: first matching keyword wins, longest
    match breaking ties.

    Table values are ``(category, summary)``; a None summary falls back to
    the transcript's first five words. The fallback template covers inputs
    with no keyword match (``{head}`` substitutes those five words too).
    """
    if not keyword_table:
        raise ValueError("keyword table must be non-empty")
    head = " ".join(transcript.split()[:SUMMARY_WORDS_MAX]) or "idea"
    lowered = transcript.casefold()
    hits = [kw for kw in keyword_table if kw.casefold() in lowered]
    if not hits:
        return fallback.replace("{head}", head)
    # Longest keyword wins; lexicographic order settles equal lengths.
    best = sorted(hits, key=lambda kw: (-len(kw), kw))[0]
    category, summary = keyword_table[best]
    return f"{category};{summary if summary is not None else head}"


@dataclass
class MockProvider:
    """In-process provider double built on :func:`mock_inference`."""

    keyword_table: dict[str, tuple[str, str | None]]
    fallback: str = "General;{head}"
    # Artificial per-call delay, seconds; lets tests exercise timeouts.
    delay_s: float = 0.0

    def infer(self, request: InferenceRequest, timeout_s: float) -> str:
        if self.delay_s > timeout_s:
            raise TimeoutError(f"mock provider exceeded {timeout_s}s deadline")
        return mock_inference(request.transcript, self.keyword_table, self.fallback)

    @classmethod
    def for_topic(cls, config: TopicConfig) -> "MockProvider":
        """Serviceable demo table: every word of every seed category keys to
        that category; summaries default to the transcript head."""
        table: dict[str, tuple[str, str | None]] = {}
        for category in config.seed_categories:
            for word in category.display.replace("&", " ").split():
                if len(word) < 3:
                    continue
                table.setdefault(word.casefold(), (category.display, None))
            table[category.display.casefold()] = (category.display, None)
        return cls(table)


@dataclass
class OpenAiChatProvider:
    """Live adapter for any OpenAI-compatible chat completion endpoint."""

    endpoint: str
    model: str
    api_key: str = ""

    def infer(self, request: InferenceRequest, timeout_s: float) -> str:
        body = json.dumps(
            {
                "model": self.model,
                "messages": [{"role": "user", "content": request.prompt}],
                "temperature": 0.0,
            }
        ).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint,
            data=body,
            headers={
                "Content-Type": "application/json",
                **({"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}),
            },
        )
        try:
            with urllib.request.urlopen(req, timeout=timeout_s) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except TimeoutError:
            raise
        except OSError as exc:  # URLError wraps socket timeouts too
            if "timed out" in str(exc).lower():
                raise TimeoutError(str(exc)) from exc
            raise
        content = payload["choices"][0]["message"]["content"]
        return content.strip().splitlines()[0] if content.strip() else ""


# -- organizer ---------------------------------------------------------------

@dataclass
class OrganizeOutcome:
    """Inference result awaiting ordered application, or a recorded failure."""

    utterance: Utterance
    parsed: ParsedOutput | None
    raw: str | None
    failure_reason: str | None = None
    failure_detail: str = ""


@dataclass
class SemanticOrganizer:
    """Turns utterances into categorize/create/grow event sequences.

    ``categorize`` may run concurrently for distinct utterances;
    ``apply`` must be called under the session's serialization, in
    submission order, because create-vs-reuse is decided against the state
    current at apply time.
    """

    config: TopicConfig
    provider: InferenceProvider
    params: LayoutParams = field(default_factory=lambda: DEFAULT_PARAMS)
    call_deadline_s: float = DEFAULT_CALL_DEADLINE_S

    def categorize(self, utterance: Utterance, state: SceneState) -> OrganizeOutcome:
        """Run inference for one utterance against the live category list."""
        live = [island.category for island in state.islands]
        request = InferenceRequest(
            prompt=build_prompt(self.config, live, utterance.transcript),
            transcript=utterance.transcript,
        )
        try:
            raw = self._infer_with_retry(request)
        except ProviderTimeout as exc:
            return OrganizeOutcome(utterance, None, None, "provider_timeout", str(exc))
        try:
            parsed = self._parse_with_repair(request, raw)
        except ParseFailure as exc:
            return OrganizeOutcome(utterance, None, raw, "parse_failure", str(exc))
        except ProviderTimeout as exc:
            return OrganizeOutcome(utterance, None, raw, "provider_timeout", str(exc))
        return OrganizeOutcome(utterance, parsed, raw)

    def apply(
        self, outcome: OrganizeOutcome, state: SceneState
    ) -> tuple[OrganizeResult | None, list[SessionEvent]]:
        """Emit the event sequence for a finished inference.

        Success: ``categorized``, then ``island_created`` iff the category is
        new at apply time, then ``tree_added``. Failure: one
        ``inference_error`` and no scene mutation.

        Events are stamped at apply time: results for an early utterance may
        land after later submissions, and log time never runs backward.
        """
        utterance = outcome.utterance
        seq = state.last_seq
        t = max(utterance.t, state.last_t)
        if outcome.parsed is None:
            event = SessionEvent(
                seq=seq + 1,
                t=t,
                kind=EventKind.INFERENCE_ERROR,
                payload={
                    "utterance_id": utterance.id,
                    "reason": outcome.failure_reason or "unknown",
                    "detail": outcome.failure_detail,
                },
            )
            return None, [event]

        parsed = outcome.parsed
        island = state.island_by_category(parsed.category)
        island_action = "reused" if island is not None else "created"
        events: list[SessionEvent] = [
            SessionEvent(
                seq=seq + 1,
                t=t,
                kind=EventKind.CATEGORIZED,
                payload={
                    "utterance_id": utterance.id,
                    "category": parsed.category.display,
                    "summary": parsed.summary,
                    "flags": list(parsed.flags),
                    "island_action": island_action,
                    "raw": outcome.raw,
                },
            )
        ]
        if island is None:
            island_id = f"isl-{len(state.islands) + 1:04d}"
            pose = place_island(len(state.islands), self.params)
            events.append(
                SessionEvent(
                    seq=seq + 2,
                    t=t,
                    kind=EventKind.ISLAND_CREATED,
                    payload={
                        "island_id": island_id,
                        "category": parsed.category.display,
                        "cloud_label": parsed.category.display,
                        "overview_pose": {"x": pose.x, "y": pose.y, "heading": pose.heading},
                        "pathway": {"radius": self.params.pathway_radius, "entry_angle": 0.0},
                        "body_radius": self.params.island_radius_body,
                    },
                )
            )
            slot = 0
        else:
            island_id = island.id
            placed = len(island.placed_trees)
            slot = placed if placed < self.params.slots_per_island else OVERFLOW_SLOT
        events.append(
            SessionEvent(
                seq=events[-1].seq + 1,
                t=t,
                kind=EventKind.TREE_ADDED,
                payload={
                    "island_id": island_id,
                    "tree_id": f"tree-{state.tree_count + 1:04d}",
                    "utterance_id": utterance.id,
                    "summary": parsed.summary,
                    "slot": slot,
                },
            )
        )
        result = OrganizeResult(
            category=parsed.category,
            summary=parsed.summary,
            island_action=island_action,
            flags=parsed.flags,
        )
        return result, events

    def organize(
        self, utterance: Utterance, state: SceneState
    ) -> tuple[OrganizeResult | None, list[SessionEvent]]:
        """Synchronous categorize-then-apply for one utterance."""
        return self.apply(self.categorize(utterance, state), state)

    def _infer_with_retry(self, request: InferenceRequest) -> str:
        try:
            return self.provider.infer(request, self.call_deadline_s)
        except TimeoutError:
            pass
        try:
            return self.provider.infer(request, self.call_deadline_s)
        except TimeoutError as exc:
            raise ProviderTimeout(
                f"provider timed out twice at {self.call_deadline_s}s"
            ) from exc

    def _parse_with_repair(self, request: InferenceRequest, raw: str) -> ParsedOutput:
        try:
            return parse_output(raw)
        except (MissingDelimiter, EmptySegment):
            pass
        repaired_request = InferenceRequest(
            prompt=f"{request.prompt}\n\nReminder: {FORMAT_RULE}",
            transcript=request.transcript,
        )
        try:
            retry_raw = self.provider.infer(repaired_request, self.call_deadline_s)
        except TimeoutError as exc:
            raise ProviderTimeout("provider timed out on repair retry") from exc
        try:
            return parse_output(retry_raw)
        except (MissingDelimiter, EmptySegment) as exc:
            raise ParseFailure(f"unparseable after repair retry: {retry_raw!r}") from exc
