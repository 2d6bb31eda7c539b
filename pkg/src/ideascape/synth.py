"""Synthetic session construction for fixtures and acceptance runs.

Drives a real :class:`IdeationSession` with a scripted timeline and a
deterministic keyword provider, so generated logs exercise the same code
paths as live ones: requested idea totals, in-island counts, matched counts,
and the dwell schedule come out exact by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .layout import LayoutParams, DEFAULT_PARAMS
from .organizer import MockProvider, TopicConfig
from .session import IdeationSession
from .topics import load_topic

# Keyword tokens embedded in generated transcripts; the table maps them to
# stable category names.
_KEYWORD = "topickw{index}"


@dataclass(frozen=True)
class SynthSpec:
    """Shape of the synthetic session.

    ``ideas`` utterances total, ``in_island`` of them submitted while
    immersed, ``matched`` of those matching the immersion island's category.
    The immersed dwell lasts ``duration_s - overview_s``; when ``overview_s``
    is unset it defaults to the idea split (immersion share = in-island
    share).
    """

    ideas: int
    in_island: int
    matched: int
    duration_s: float = 600.0
    overview_s: float | None = None
    categories: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.ideas < 0 or self.in_island < 0 or self.matched < 0:
            raise ValueError("counts must be non-negative")
        if self.in_island > self.ideas:
            raise ValueError("in_island cannot exceed ideas")
        if self.matched > self.in_island:
            raise ValueError("matched cannot exceed in_island")
        if self.in_island > 0 and self.in_island >= self.ideas:
            raise ValueError(
                "in_island must stay below ideas: the first idea is produced "
                "in overview because diving needs an existing island"
            )
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")
        if self.overview_s is not None and not 0 <= self.overview_s <= self.duration_s:
            raise ValueError("overview seconds must lie within the duration")
        if self.categories < 2:
            raise ValueError("need at least two categories for mismatches")

    @property
    def immersed_s(self) -> float:
        if self.overview_s is not None:
            return self.duration_s - self.overview_s
        if self.ideas > 0 and self.in_island > 0:
            return self.duration_s * self.in_island / self.ideas
        return 0.0


def _category_names(count: int, topic: TopicConfig) -> list[str]:
    names = [c.display for c in topic.seed_categories]
    while len(names) < count:
        names.append(f"Extra Topic {len(names) + 1}")
    return names[:count]


def generate_session(
    spec: SynthSpec,
    out_path: str | Path,
    topic_name: str = "study2-sustainability",
    params: LayoutParams = DEFAULT_PARAMS,
) -> Path:
    """Write a synthetic session log and return its path."""
    immersed_s = spec.immersed_s
    if spec.in_island > 0 and immersed_s <= 0:
        raise ValueError("in-island ideas need immersed dwell time; lower overview_s")
    if immersed_s > 0 and spec.ideas == 0:
        raise ValueError("immersion needs at least one idea to create an island")

    topic = load_topic(topic_name)
    names = _category_names(spec.categories, topic)
    table = {_KEYWORD.format(index=i): (name, None) for i, name in enumerate(names)}
    provider = MockProvider(table, fallback=f"{names[0]};{{head}}")
    session = IdeationSession(
        session_id="synth",
        topic=topic,
        provider=provider,
        params=params,
        transition_mode="dive",
        log_path=out_path,
    )
    rng = random.Random(spec.seed)
    dive_t = spec.duration_s - immersed_s
    overview_ideas = spec.ideas - spec.in_island

    # Overview phase first: creates the islands a dive needs and spreads
    # ideas across categories round-robin so flexibility is predictable.
    step = dive_t / (overview_ideas + 1) if overview_ideas else 0.0
    for i in range(overview_ideas):
        keyword = _KEYWORD.format(index=i % spec.categories)
        session.submit_utterance(f"idea {i + 1} about {keyword}", step * (i + 1))

    if immersed_s > 0:
        home = session.state.islands[0]
        session.dive_in(home.id, dive_t)
        inner_step = immersed_s / (spec.in_island + 1) if spec.in_island else 0.0
        plan = ["match"] * spec.matched + ["miss"] * (spec.in_island - spec.matched)
        rng.shuffle(plan)
        other_cursor = 1
        for i, kind in enumerate(plan):
            if kind == "match":
                keyword = _KEYWORD.format(index=0)
            else:
                keyword = _KEYWORD.format(index=other_cursor)
                other_cursor = other_cursor % (spec.categories - 1) + 1
            session.submit_utterance(
                f"idea inside about {keyword}", dive_t + inner_step * (i + 1)
            )
        session.dive_out(spec.duration_s)

    # Pin the session duration with a final logged pose.
    session.update_pose((0.0, 0.0), 0.0, spec.duration_s)
    session.end(spec.duration_s)
    return Path(out_path)
