"""Shared domain types: passages, questions, chains and beams.

Everything here is an immutable value object. Chains are ordered and
duplicate-free; beams carry a deterministic total order (score descending,
ties broken by lexicographic comparison of the prefix id list) so that every
downstream search result is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DuplicatePassage


@dataclass(frozen=True)
class Passage:
    """One candidate passage, identified by an opaque string id."""

    id: str
    title: str = ""
    body: str = ""


@dataclass(frozen=True)
class Question:
    """A natural-language query with an opaque id."""

    id: str
    text: str


@dataclass(frozen=True)
class CandidateSet:
    """The ordered pool of passages provided with one question.

    Construction is lenient (ingested data may be malformed); use
    :func:`validate_example` to surface duplicate or empty ids as data
    violations rather than crashes.
    """

    passages: tuple[Passage, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "passages", tuple(self.passages))
        by_id: dict[str, Passage] = {}
        for p in self.passages:
            by_id.setdefault(p.id, p)
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.passages)

    def __iter__(self):
        return iter(self.passages)

    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.passages)

    def get(self, passage_id: str) -> Passage:
        return self._by_id[passage_id]

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self._by_id

    def duplicate_ids(self) -> list[str]:
        seen: set[str] = set()
        dups: list[str] = []
        for p in self.passages:
            if p.id in seen and p.id not in dups:
                dups.append(p.id)
            seen.add(p.id)
        return dups


@dataclass(frozen=True)
class MultiHopExample:
    """A labeled retrieval instance.

    ``gold_chain`` is the ordered sequence of relevant passage ids when the
    source provides per-hop order; otherwise only ``gold_set`` is known.
    ``extras`` preserves unknown source fields so canonical files round-trip.
    """

    question: Question
    candidates: CandidateSet
    gold_chain: tuple[str, ...] | None = None
    gold_set: frozenset[str] = frozenset()
    answer: str | None = None
    hop_count: int | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.gold_chain is not None:
            object.__setattr__(self, "gold_chain", tuple(self.gold_chain))
        gold_set = frozenset(self.gold_set)
        if not gold_set and self.gold_chain:
            gold_set = frozenset(self.gold_chain)
        object.__setattr__(self, "gold_set", gold_set)

    def gold_hops(self) -> int | None:
        """Hop count implied by the labels: explicit count, chain length or
        gold-set size, in that order of preference."""
        if self.hop_count is not None:
            return self.hop_count
        if self.gold_chain is not None:
            return len(self.gold_chain)
        if self.gold_set:
            return len(self.gold_set)
        return None


@dataclass(frozen=True)
class ChainHypothesis:
    """An ordered, duplicate-free chain of passage ids.

    ``score`` is the scorer output for the full question+prefix sequence at
    the latest hop; chains are rescored whole at every hop, never summed.
    ``hop`` always equals ``len(prefix)`` (0 only for the internal seed).
    """

    prefix: tuple[str, ...]
    score: float
    hop: int | None = None

    def __post_init__(self) -> None:
        prefix = tuple(self.prefix)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "score", float(self.score))
        hop = len(prefix) if self.hop is None else self.hop
        object.__setattr__(self, "hop", hop)
        if hop != len(prefix):
            raise ValueError(f"hop {hop} does not match prefix length {len(prefix)}")
        if len(set(prefix)) != len(prefix):
            raise DuplicatePassage(f"chain contains a duplicate passage: {prefix}")
        if not math.isfinite(self.score):
            raise ValueError(f"chain score must be finite, got {self.score}")

    @property
    def sort_key(self) -> tuple[float, tuple[str, ...]]:
        """Total order: score descending, then prefix ids lexicographically."""
        return (-self.score, self.prefix)


def seed_chain() -> ChainHypothesis:
    """The empty chain every search starts from."""
    return ChainHypothesis((), 0.0, 0)


def extend_chain(chain: ChainHypothesis, passage_id: str, new_score: float) -> ChainHypothesis:
    """Append ``passage_id`` to ``chain`` with the score of the extended
    sequence. The only way prefixes grow anywhere in the system."""
    if passage_id in chain.prefix:
        raise DuplicatePassage(
            f"passage {passage_id!r} already in chain {list(chain.prefix)}"
        )
    return ChainHypothesis(chain.prefix + (passage_id,), new_score, chain.hop + 1)


@dataclass(frozen=True)
class Beam:
    """The hypotheses retained after one hop, sorted best-first."""

    hop: int
    hypotheses: tuple[ChainHypothesis, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        if not self.hypotheses:
            raise ValueError("a beam cannot be empty")
        for h in self.hypotheses:
            if h.hop != self.hop:
                raise ValueError(f"hypothesis at hop {h.hop} in beam at hop {self.hop}")
        keys = [h.sort_key for h in self.hypotheses]
        if keys != sorted(keys):
            raise ValueError("beam hypotheses must be sorted best-first")

    @property
    def best(self) -> ChainHypothesis:
        return self.hypotheses[0]

    def __len__(self) -> int:
        return len(self.hypotheses)

    def prefixes(self) -> set[tuple[str, ...]]:
        return {h.prefix for h in self.hypotheses}


@dataclass(frozen=True)
class ExpansionSet:
    """All one-passage extensions of a beam, before top-B selection."""

    hop: int
    items: tuple[ChainHypothesis, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        for h in self.items:
            if h.hop != self.hop:
                raise ValueError(f"expansion at hop {h.hop} in set at hop {self.hop}")
        prefixes = {h.prefix for h in self.items}
        if len(prefixes) != len(self.items):
            raise ValueError("expansion set contains duplicate prefixes")

    def __len__(self) -> int:
        return len(self.items)


def validate_example(example: MultiHopExample) -> list[str]:
    """Check every example invariant and return the violations found.

    Violations are data, not errors: callers decide whether to skip or abort.
    An empty list means the example is well-formed.
    """
    violations: list[str] = []
    if not example.question.id:
        violations.append("question id is empty")
    if not example.question.text.strip():
        violations.append("question text is empty")
    if len(example.candidates) == 0:
        violations.append("candidates is empty")
    for pid in example.candidates.duplicate_ids():
        violations.append(f"duplicate candidate id {pid}")
    for p in example.candidates:
        if not p.id:
            violations.append("candidate id is empty")
            break
    known_ids = set(example.candidates.ids())
    if example.gold_chain is not None:
        seen: set[str] = set()
        for pid in example.gold_chain:
            if pid in seen:
                violations.append(f"gold_chain contains duplicate {pid}")
            seen.add(pid)
        for pid in dict.fromkeys(example.gold_chain):
            if pid not in known_ids:
                violations.append(f"gold passage {pid} not in candidates")
        if example.gold_set != frozenset(example.gold_chain):
            violations.append("gold_set does not match gold_chain elements")
        if example.hop_count is not None and example.hop_count != len(example.gold_chain):
            violations.append(
                f"hop_count {example.hop_count} does not match gold_chain length "
                f"{len(example.gold_chain)}"
            )
    elif example.gold_set:
        for pid in sorted(example.gold_set):
            if pid not in known_ids:
                violations.append(f"gold passage {pid} not in candidates")
        if example.hop_count is not None and example.hop_count != len(example.gold_set):
            violations.append(
                f"hop_count {example.hop_count} does not match gold_set size "
                f"{len(example.gold_set)}"
            )
    return violations
