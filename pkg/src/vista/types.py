"""Domain types shared by every stage of the anticipation pipeline.

All types are immutable after construction and safe for unrestricted
parallel use; every operation over them is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .boxes import Box2D
from .errors import ValidationError

# Per-example prediction lists keyed by example uid, each list kept sorted
# by the canonical hypothesis ordering (see `canonical_key`).
PredictionSet = dict[str, list["StaHypothesis"]]


@dataclass(frozen=True)
class Taxonomy:
    """Noun and verb vocabularies; category ids are indices into these lists."""

    noun_names: tuple[str, ...]
    verb_names: tuple[str, ...]

    def __post_init__(self):
        problems = []
        for kind, names in (("noun", self.noun_names), ("verb", self.verb_names)):
            if len(names) == 0:
                problems.append(f"{kind} vocabulary is empty")
            if len(set(names)) != len(names):
                problems.append(f"{kind} vocabulary has duplicate labels")
        if problems:
            raise ValidationError(problems)

    @property
    def n_nouns(self) -> int:
        return len(self.noun_names)

    @property
    def n_verbs(self) -> int:
        return len(self.verb_names)

    def check_ids(self, noun_id: int, verb_id: int, context: str = "") -> list[str]:
        """Return a list of problems (empty when both ids are in range)."""
        problems = []
        where = f" in {context}" if context else ""
        if not (0 <= noun_id < self.n_nouns):
            problems.append(f"noun_id {noun_id} out of range [0, {self.n_nouns}){where}")
        if not (0 <= verb_id < self.n_verbs):
            problems.append(f"verb_id {verb_id} out of range [0, {self.n_verbs}){where}")
        return problems


@dataclass(frozen=True)
class StaHypothesis:
    """One anticipation hypothesis: where, what, how, when, and how sure."""

    box: Box2D
    noun_id: int
    verb_id: int
    ttc: float
    score: float
    source_id: int | None = None

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.ttc) and self.ttc >= 0.0):
            problems.append(f"ttc must be finite and >= 0, got {self.ttc}")
        if not (math.isfinite(self.score) and self.score > 0.0):
            problems.append(f"score must be finite and > 0, got {self.score}")
        if self.noun_id < 0:
            problems.append(f"noun_id must be >= 0, got {self.noun_id}")
        if self.verb_id < 0:
            problems.append(f"verb_id must be >= 0, got {self.verb_id}")
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class GroundTruthInstance:
    """One annotated future interaction for an example."""

    example_uid: str
    box: Box2D
    noun_id: int
    verb_id: int
    ttc: float

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.ttc) and self.ttc >= 0.0):
            problems.append(f"ttc must be finite and >= 0, got {self.ttc}")
        if self.noun_id < 0:
            problems.append(f"noun_id must be >= 0, got {self.noun_id}")
        if self.verb_id < 0:
            problems.append(f"verb_id must be >= 0, got {self.verb_id}")
        if problems:
            raise ValidationError(problems)


def canonical_key(h: StaHypothesis):
    """Total ordering on hypotheses: score descending, then ascending
    (noun_id, verb_id, x1, y1, x2, y2, ttc). Makes every downstream sort,
    truncation, and tie-break bitwise reproducible."""
    return (-h.score, h.noun_id, h.verb_id, h.box.x1, h.box.y1, h.box.x2, h.box.y2, h.ttc)


def sort_canonical(hyps: list[StaHypothesis]) -> list[StaHypothesis]:
    return sorted(hyps, key=canonical_key)
