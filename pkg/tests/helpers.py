"""Shared test builders: tiny examples, table scorers, synthetic datasets."""

from __future__ import annotations

import hashlib
import random
from typing import Iterable, Mapping, Sequence

from chainbeam import (
    CandidateSet,
    LookupScorer,
    LookupTable,
    MultiHopExample,
    Passage,
    Question,
    Scorer,
)


def passage(pid: str, title: str = "", body: str = "") -> Passage:
    return Passage(pid, title or f"Title {pid}", body or f"body text of {pid}")


def example(
    qid: str = "q1",
    candidate_ids: Sequence[str] = ("A", "B", "C"),
    gold_chain: Sequence[str] | None = None,
    gold_set: Iterable[str] = (),
    question_text: str = "who wrote anne of green gables",
    hop_count: int | None = None,
    answer: str | None = None,
) -> MultiHopExample:
    return MultiHopExample(
        question=Question(qid, question_text),
        candidates=CandidateSet(tuple(passage(pid) for pid in candidate_ids)),
        gold_chain=tuple(gold_chain) if gold_chain is not None else None,
        gold_set=frozenset(gold_set),
        hop_count=hop_count,
        answer=answer,
    )


def table_scorer(qid: str, chain_scores: Mapping[Sequence[str], float]) -> LookupScorer:
    """Lookup scorer over {chain id tuple: score} for a single question."""
    table = LookupTable()
    for chain, score in chain_scores.items():
        table.set(qid, tuple(chain), score)
    return LookupScorer(table)


# the beam-recovery table used across engine and acceptance tests
BEAM_RECOVERY_SCORES = {
    ("A",): 0.9,
    ("B",): 0.5,
    ("C",): 0.1,
    ("A", "B"): 0.2,
    ("A", "C"): 0.8,
    ("B", "A"): 0.95,
    ("B", "C"): 0.4,
}


class HashScorer(Scorer):
    """Deterministic pseudo-random scorer: the score of a chain is a uniform
    draw in [low, high] keyed by (salt, question id, chain ids)."""

    profile = "logit"

    def __init__(self, salt: int = 0, low: float = -2.0, high: float = 2.0):
        self.salt = salt
        self.low = low
        self.high = high

    def score_one(self, request) -> float:
        key = f"{self.salt}|{request.question.id}|{'|'.join(request.chain_ids())}"
        digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
        unit = int.from_bytes(digest, "big") / 2**64
        return self.low + unit * (self.high - self.low)


def random_lookup_instance(
    rng: random.Random,
    n: int,
    k: int,
    qid: str = "q",
) -> tuple[MultiHopExample, LookupScorer]:
    """An n-candidate example plus a table scoring every chain up to length k."""
    import itertools

    ids = [f"p{i}" for i in range(n)]
    ex = example(qid, ids, question_text=f"question {qid}")
    table = LookupTable()
    for length in range(1, k + 1):
        for chain in itertools.permutations(ids, length):
            table.set(qid, chain, rng.uniform(-5.0, 5.0))
    return ex, LookupScorer(table)


def gold_aware_dataset(
    num_questions: int,
    rng: random.Random,
    n_candidates: int = 10,
) -> tuple[list[MultiHopExample], LookupTable]:
    """Synthetic dataset whose gold chains are uniquely top-scored.

    Every extension of a gold prefix is in the table: the gold continuation
    scores above 2, every distractor continuation in [0, 1]. All other chains
    fall back to the table's missing-key sentinel, so threshold mode stops by
    itself one hop past the gold chain.
    """
    examples: list[MultiHopExample] = []
    table = LookupTable()
    for q in range(num_questions):
        qid = f"q{q:04d}"
        ids = [f"{qid}-p{i}" for i in range(n_candidates)]
        hops = rng.choice([2, 3, 4])
        gold = rng.sample(ids, hops)
        examples.append(
            MultiHopExample(
                question=Question(qid, f"synthetic question {q}"),
                candidates=CandidateSet(
                    tuple(Passage(pid, f"title {pid}", f"body {pid}") for pid in ids)
                ),
                gold_chain=tuple(gold),
                hop_count=hops,
            )
        )
        for t in range(1, hops + 1):
            prefix = tuple(gold[: t - 1])
            for pid in ids:
                if pid in prefix:
                    continue
                if pid == gold[t - 1]:
                    score = 2.0 + rng.random()
                else:
                    score = rng.random()
                table.set(qid, prefix + (pid,), score)
    return examples, table
