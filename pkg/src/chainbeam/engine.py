"""End-to-end chain retrieval: hop-wise expansion, top-B selection, stopping.

Each hop concatenates every retained hypothesis with every unused candidate,
scores all extended sequences in one batch, and keeps the B best. Fixed-hop
mode runs exactly k hops; threshold mode keeps going until the best next-hop
score drops below the threshold and then returns the previous hop's winner.
A minimum of one hop is always returned.

Chains are rescored whole at every hop (scores are not accumulated), so two
permutations of the same passage set are distinct hypotheses with distinct
scores.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

from .errors import (
    EmptyCandidateSet,
    EmptyChainList,
    DuplicatePassage,
    NoLegalExpansion,
    TooLarge,
)
from .scoring import Head, Scorer, ScoreRequest, score_batch
from .types import (
    Beam,
    CandidateSet,
    ChainHypothesis,
    ExpansionSet,
    MultiHopExample,
    Passage,
    Question,
    extend_chain,
    seed_chain,
)

EXHAUSTIVE_MAX_CANDIDATES = 10
EXHAUSTIVE_MAX_HOPS = 5


@dataclass(frozen=True)
class FixedHops:
    """Run exactly ``hops`` hops."""

    hops: int


@dataclass(frozen=True)
class Threshold:
    """Variable-hop mode: stop once the best next-hop score falls below tau."""

    tau: float


Mode = Union[FixedHops, Threshold]


@dataclass(frozen=True)
class SearchConfig:
    beam_size: int = 1
    mode: Mode = Threshold(-1.0)
    min_hops: int = 1
    max_hops: int = 8

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not 1 <= self.min_hops <= self.max_hops:
            raise ValueError("need 1 <= min_hops <= max_hops")
        if isinstance(self.mode, FixedHops):
            if not self.min_hops <= self.mode.hops <= self.max_hops:
                raise ValueError("fixed hop count must lie in [min_hops, max_hops]")


class StopReason(str, Enum):
    FIXED_K_REACHED = "fixed_k_reached"
    BELOW_THRESHOLD = "below_threshold"
    MAX_HOPS_REACHED = "max_hops_reached"
    CANDIDATES_EXHAUSTED = "candidates_exhausted"


@dataclass(frozen=True)
class RetrievalResult:
    """The winning chain plus enough trace to explain why the search stopped.

    ``per_hop_best_score`` has one entry per committed hop; when the search
    stopped below threshold it carries one extra trailing entry, the
    sub-threshold probe score that triggered the stop.
    """

    chain: ChainHypothesis
    hops_taken: int
    per_hop_best_score: tuple[float, ...]
    stop_reason: StopReason
    forced_min_hop: bool = False


def seed_beam() -> Beam:
    return Beam(0, (seed_chain(),))


def expand(
    beam: Beam,
    candidates: CandidateSet,
    question: Question,
    scorer: Scorer,
) -> ExpansionSet:
    """All one-passage extensions of ``beam``, scored in a single batch.

    The first hop (empty seed) is scored with the first-hop head, every later
    hop with the other head. Raises NoLegalExpansion when every candidate is
    already used by every hypothesis.
    """
    hop = beam.hop + 1
    head = Head.FIRST_HOP if beam.hop == 0 else Head.LATER_HOP
    pairs: list[tuple[ChainHypothesis, Passage]] = []
    requests: list[ScoreRequest] = []
    for hyp in beam.hypotheses:
        prefix_passages = tuple(candidates.get(pid) for pid in hyp.prefix)
        for passage in candidates:
            if passage.id in hyp.prefix:
                continue
            pairs.append((hyp, passage))
            requests.append(ScoreRequest(head, question, prefix_passages, passage))
    if not pairs:
        raise NoLegalExpansion(f"no unused candidate for any hypothesis at hop {hop}")
    scores = score_batch(scorer, requests)
    items = tuple(
        extend_chain(hyp, passage.id, score)
        for (hyp, passage), score in zip(pairs, scores)
    )
    return ExpansionSet(hop, items)


def select_top(expansions: ExpansionSet, beam_size: int) -> Beam:
    """The min(B, M) highest-scoring hypotheses, deterministically ordered."""
    if len(expansions) == 0:
        raise ValueError("cannot select from an empty expansion set")
    ranked = sorted(expansions.items, key=lambda h: h.sort_key)
    return Beam(expansions.hop, tuple(ranked[:beam_size]))


def fixed_hop_beams(
    example: MultiHopExample,
    scorer: Scorer,
    hops: int,
    beam_size: int,
) -> list[Beam]:
    """The committed beam at each hop 1..hops; raises NoLegalExpansion if the
    candidate set runs out before ``hops`` hops."""
    if len(example.candidates) == 0:
        raise EmptyCandidateSet(f"question {example.question.id} has no candidates")
    beams: list[Beam] = []
    beam = seed_beam()
    for _ in range(hops):
        expansions = expand(beam, example.candidates, example.question, scorer)
        beam = select_top(expansions, beam_size)
        beams.append(beam)
    return beams


def retrieve(
    example: MultiHopExample,
    scorer: Scorer,
    config: SearchConfig,
) -> RetrievalResult:
    """Run the configured search over one example and return the winner."""
    if len(example.candidates) == 0:
        raise EmptyCandidateSet(f"question {example.question.id} has no candidates")
    if isinstance(config.mode, FixedHops):
        return _retrieve_fixed(example, scorer, config)
    return _retrieve_threshold(example, scorer, config)


def _retrieve_fixed(
    example: MultiHopExample, scorer: Scorer, config: SearchConfig
) -> RetrievalResult:
    beams: list[Beam] = []
    per_hop: list[float] = []
    beam = seed_beam()
    reason = StopReason.FIXED_K_REACHED
    for _ in range(config.mode.hops):
        try:
            expansions = expand(beam, example.candidates, example.question, scorer)
        except NoLegalExpansion:
            reason = StopReason.CANDIDATES_EXHAUSTED
            break
        beam = select_top(expansions, config.beam_size)
        beams.append(beam)
        per_hop.append(beam.best.score)
    winner = beams[-1].best
    return RetrievalResult(winner, winner.hop, tuple(per_hop), reason)


def _retrieve_threshold(
    example: MultiHopExample, scorer: Scorer, config: SearchConfig
) -> RetrievalResult:
    tau = config.mode.tau
    beams: list[Beam] = []
    per_hop: list[float] = []
    beam = seed_beam()
    forced = False
    while True:
        hop = beam.hop + 1
        if hop > config.max_hops:
            reason = StopReason.MAX_HOPS_REACHED
            break
        try:
            expansions = expand(beam, example.candidates, example.question, scorer)
        except NoLegalExpansion:
            reason = StopReason.CANDIDATES_EXHAUSTED
            break
        best_score = max(h.score for h in expansions.items)
        if best_score < tau:
            if hop <= config.min_hops:
                # below threshold but a result is owed: commit anyway
                forced = True
            else:
                per_hop.append(best_score)
                reason = StopReason.BELOW_THRESHOLD
                break
        beam = select_top(expansions, config.beam_size)
        beams.append(beam)
        per_hop.append(beam.best.score)
    winner = beams[-1].best
    return RetrievalResult(winner, winner.hop, tuple(per_hop), reason, forced)


def exhaustive_retrieve(
    example: MultiHopExample,
    scorer: Scorer,
    hops: int,
) -> ChainHypothesis:
    """Brute-force oracle: score every duplicate-free ordered chain of length
    ``hops`` (full sequence at the final hop, exactly as retrieve would) and
    return the maximum under the same tie rule."""
    n = len(example.candidates)
    if n > EXHAUSTIVE_MAX_CANDIDATES or hops > EXHAUSTIVE_MAX_HOPS:
        raise TooLarge(
            f"refusing to enumerate chains for n={n}, k={hops} "
            f"(guard: n <= {EXHAUSTIVE_MAX_CANDIDATES}, k <= {EXHAUSTIVE_MAX_HOPS})"
        )
    if hops < 1 or hops > n:
        raise ValueError(f"chain length {hops} not in [1, {n}]")
    head = Head.FIRST_HOP if hops == 1 else Head.LATER_HOP
    chains = list(itertools.permutations(example.candidates.ids(), hops))
    requests = [
        ScoreRequest(
            head,
            example.question,
            tuple(example.candidates.get(pid) for pid in chain[:-1]),
            example.candidates.get(chain[-1]),
        )
        for chain in chains
    ]
    scores = score_batch(scorer, requests)
    hypotheses = [
        ChainHypothesis(chain, score, hops) for chain, score in zip(chains, scores)
    ]
    return min(hypotheses, key=lambda h: h.sort_key)


def rerank_chains(
    question: Question,
    chains: Sequence[Sequence[Passage]],
    scorer: Scorer,
) -> list[tuple[tuple[Passage, ...], float]]:
    """Score externally retrieved chains as full sequences and sort them.

    Output is a permutation of the input, score descending, ties broken by
    the canonical id-list order. Single-passage chains use the first-hop head.
    """
    if not chains:
        raise EmptyChainList("no chains to rerank")
    requests: list[ScoreRequest] = []
    for chain in chains:
        if not chain:
            raise ValueError("cannot rerank an empty chain")
        ids = [p.id for p in chain]
        if len(set(ids)) != len(ids):
            raise DuplicatePassage(f"chain contains duplicate passages: {ids}")
        head = Head.FIRST_HOP if len(chain) == 1 else Head.LATER_HOP
        requests.append(ScoreRequest(head, question, tuple(chain[:-1]), chain[-1]))
    scores = score_batch(scorer, requests)
    ranked = [(tuple(chain), score) for chain, score in zip(chains, scores)]
    ranked.sort(key=lambda pair: (-pair[1], tuple(p.id for p in pair[0])))
    return ranked
