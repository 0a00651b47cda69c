"""Chain scoring: request shape, sequence assembly, built-in scorers.

A scorer maps (head, question, prefix, candidate) to a real-valued score for
the full concatenated sequence. Two heads exist because the first hop scores
plain (question, passage) pairs while later hops score longer prefixes; the
tag travels with every request even when a scorer ignores it.

Score scales differ by scorer profile: remote neural scorers return
unbounded logits (stopping threshold defaults to -1.0), the built-in lexical
scorer returns containment in [0, 1] (threshold defaults to 0.05).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import groupby
from pathlib import Path
from typing import ClassVar, Iterable, Sequence

from .errors import EmptyCandidate, EmptyInput, QuestionTooLong, ScorerUnavailable
from .types import Passage, Question

SEQ_START = "<s>"
SEQ_END = "</s>"

#: threshold defaults per scorer profile, used by the CLI's ``auto`` mode
PROFILE_THRESHOLDS = {"logit": -1.0, "unit": 0.05}


class Head(IntEnum):
    """Which classification head scores the sequence (1 on the wire for the
    first hop, 2 for every later hop)."""

    FIRST_HOP = 1
    LATER_HOP = 2


@dataclass(frozen=True)
class ScoreRequest:
    """One sequence to score: question + prefix passages + candidate.

    The full :class:`Question` travels with the request so that id-keyed
    scorers (lookup tables) and text-keyed scorers (lexical, remote) both
    have what they need.
    """

    head: Head
    question: Question
    prefix: tuple[Passage, ...]
    candidate: Passage

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))
        if (self.head == Head.FIRST_HOP) != (len(self.prefix) == 0):
            raise ValueError(
                f"head {self.head.name} inconsistent with prefix length {len(self.prefix)}"
            )

    def chain_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.prefix) + (self.candidate.id,)


@dataclass(frozen=True)
class AssemblyConfig:
    """Token budget for sequence assembly."""

    max_length: int = 512
    special_token_overhead: int = 2

    def __post_init__(self) -> None:
        if self.special_token_overhead < 0:
            raise ValueError("special_token_overhead must be non-negative")
        if self.max_length <= self.special_token_overhead:
            raise ValueError("max_length must exceed special_token_overhead")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric character."""
    return ["".join(run) for alnum, run in groupby(text.lower(), key=str.isalnum) if alnum]


def passage_tokens(passage: Passage) -> list[str]:
    """Title tokens followed by body tokens."""
    return tokenize(passage.title) + tokenize(passage.body)


def assemble_sequence(
    question: str,
    passages: Sequence[Passage],
    config: AssemblyConfig = AssemblyConfig(),
) -> list[str]:
    """Concatenate question and passages into one bounded token sequence.

    When the passages do not fit, the remaining budget is split evenly:
    every passage longer than ``floor(available / n_passages)`` tokens is cut
    to that cap, shorter ones are kept whole. The question is never cut; if
    it alone exhausts the budget, :class:`QuestionTooLong` is raised.
    """
    if not passages:
        raise ValueError("assemble_sequence needs at least one passage")
    q_tokens = tokenize(question)
    available = config.max_length - len(q_tokens) - config.special_token_overhead
    if available < 0:
        raise QuestionTooLong(
            f"question has {len(q_tokens)} tokens, budget is "
            f"{config.max_length - config.special_token_overhead}"
        )
    cap = available // len(passages)
    out = [SEQ_START]
    out.extend(q_tokens)
    for p in passages:
        toks = passage_tokens(p)
        out.extend(toks[:cap] if len(toks) > cap else toks)
    out.append(SEQ_END)
    return out


class Scorer:
    """Base class for pluggable chain scorers.

    Subclasses implement :meth:`score_one`; batches default to an element-wise
    map so results never depend on batch partitioning. Scorers must be safe
    to call from concurrent retrievals.
    """

    #: "logit" for unbounded scores, "unit" for [0, 1] scores
    profile: ClassVar[str] = "logit"

    def score_one(self, request: ScoreRequest) -> float:
        raise NotImplementedError

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[float]:
        return [self.score_one(r) for r in requests]


def score_batch(scorer: Scorer, requests: Sequence[ScoreRequest]) -> list[float]:
    """Score a batch, preserving request-to-score correspondence."""
    requests = list(requests)
    if not requests:
        return []
    scores = scorer.score_batch(requests)
    if len(scores) != len(requests):
        raise ScorerUnavailable(
            f"scorer returned {len(scores)} scores for {len(requests)} requests"
        )
    return [float(s) for s in scores]


def default_threshold(scorer: Scorer) -> float:
    """Stopping threshold for the scorer's score scale."""
    return PROFILE_THRESHOLDS[scorer.profile]


def lexical_score(request: ScoreRequest) -> float:
    """Containment of the candidate's vocabulary in the context vocabulary.

    C = token set of the candidate (title + body), X = token set of the
    question plus all prefix passages; the score is |C ∩ X| / |C|, identical
    for both heads.
    """
    candidate_tokens = set(passage_tokens(request.candidate))
    if not candidate_tokens:
        raise EmptyCandidate(f"candidate {request.candidate.id!r} has no tokens")
    context: set[str] = set(tokenize(request.question.text))
    for p in request.prefix:
        context.update(passage_tokens(p))
    return len(candidate_tokens & context) / len(candidate_tokens)


class LexicalScorer(Scorer):
    """Deterministic containment scorer; scores live in [0, 1]."""

    profile = "unit"

    def score_one(self, request: ScoreRequest) -> float:
        return lexical_score(request)


@dataclass
class LookupTable:
    """Exact-key score table, the test oracle scorer.

    Keys are (question id, full chain id sequence) in scored order: chain
    scores are order-sensitive, so permuted prefixes are distinct keys.
    Missing keys fall back to ``default_missing``.
    """

    entries: dict[tuple[str, tuple[str, ...]], float] = field(default_factory=dict)
    default_missing: float = -1.0e9

    def set(self, question_id: str, chain: Iterable[str], score: float) -> None:
        self.entries[(question_id, tuple(chain))] = float(score)

    def get(self, question_id: str, chain: Iterable[str]) -> float:
        return self.entries.get((question_id, tuple(chain)), self.default_missing)

    def to_json_dict(self) -> dict:
        return {
            "default_missing": self.default_missing,
            "entries": [
                {"qid": qid, "chain": list(chain), "score": score}
                for (qid, chain), score in sorted(self.entries.items())
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True, ensure_ascii=False, indent=2)
            + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "LookupTable":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        table = cls(default_missing=float(raw.get("default_missing", -1.0e9)))
        for entry in raw.get("entries", []):
            table.set(entry["qid"], entry["chain"], entry["score"])
        return table


def lookup_score(table: LookupTable, request: ScoreRequest) -> float:
    """Exact-key entry if present, else the table's missing-key sentinel."""
    return table.get(request.question.id, request.chain_ids())


class LookupScorer(Scorer):
    """Scorer backed by a :class:`LookupTable`; logit-scale by convention."""

    profile = "logit"

    def __init__(self, table: LookupTable):
        self.table = table

    def score_one(self, request: ScoreRequest) -> float:
        return lookup_score(self.table, request)


def softmax_distribution(scores: Sequence[float]) -> list[float]:
    """Numerically stable softmax over raw scores."""
    if len(scores) == 0:
        raise EmptyInput("softmax over zero scores")
    for s in scores:
        if not math.isfinite(s):
            raise ValueError(f"softmax input must be finite, got {s}")
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]
