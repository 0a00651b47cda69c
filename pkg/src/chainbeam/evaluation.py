"""Retrieval metrics, the additional-hop probe and report aggregation.

Retrieval EM is set equality between predicted and gold passage ids,
irrespective of order; retrieval F1 is the harmonic mean of precision and
recall over the same sets. The additional-hop probe runs one expansion past
the gold hop count and records the best score there, characterizing how
cleanly a scorer separates real hops from over-retrieval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import RetrievalResult, SearchConfig, expand, fixed_hop_beams
from .errors import ChainTooShort, EmptyGold
from .types import MultiHopExample, Passage


def retrieval_em(predicted: Iterable[str], gold: Iterable[str]) -> int:
    """1 iff predicted and gold are the same passage set."""
    return int(set(predicted) == set(gold))


def retrieval_f1(predicted: Iterable[str], gold: Iterable[str]) -> float:
    """Harmonic mean of set precision and recall; empty prediction scores 0."""
    predicted, gold = set(predicted), set(gold)
    if not gold:
        raise EmptyGold("F1 against an empty gold set is undefined")
    overlap = len(predicted & gold)
    precision = overlap / len(predicted) if predicted else 0.0
    recall = overlap / len(gold)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _chain_ids(chain: Sequence) -> list[str]:
    return [p.id if isinstance(p, Passage) else str(p) for p in chain]


def chain_top2_em(ranked_chains: Sequence, gold: Iterable[str]) -> int:
    """1 iff the top-ranked chain's first two passages equal the 2-passage
    gold set. Accepts the (chain, score) list produced by rerank_chains or a
    plain list of chains (of Passages or ids)."""
    gold = set(gold)
    if len(gold) != 2:
        raise ValueError(f"top-2 EM needs exactly 2 gold passages, got {len(gold)}")
    if not ranked_chains:
        raise ValueError("no ranked chains")
    top = ranked_chains[0]
    if (
        isinstance(top, tuple)
        and len(top) == 2
        and isinstance(top[0], (list, tuple))
        and isinstance(top[1], (int, float))
    ):
        top = top[0]
    ids = _chain_ids(top)
    if len(ids) < 2:
        raise ChainTooShort(f"top chain has {len(ids)} passages, need at least 2")
    return int(set(ids[:2]) == gold)


def additional_hop_probe(
    example: MultiHopExample,
    scorer,
    config: SearchConfig,
    gold_hops: int,
) -> float:
    """Best expansion score one hop past ``gold_hops``.

    Runs fixed-hop search to the gold hop count with the configured beam
    size, expands the final beam once more and returns the maximum score.
    """
    beams = fixed_hop_beams(example, scorer, gold_hops, config.beam_size)
    expansions = expand(beams[-1], example.candidates, example.question, scorer)
    return max(h.score for h in expansions.items)


@dataclass(frozen=True)
class GroupMetrics:
    em: float
    f1: float
    count: int


@dataclass(frozen=True)
class ProbeStats:
    mean: float
    min: float
    max: float


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate retrieval quality, overall and per gold hop count."""

    retrieval_em: float
    retrieval_f1: float
    count: int
    per_hop: dict[int, GroupMetrics]
    probe_stats: dict[int, ProbeStats] | None = None

    def to_json_dict(self) -> dict:
        out = {
            "overall": {"em": self.retrieval_em, "f1": self.retrieval_f1, "n": self.count},
            "by_hops": {
                str(hops): {"em": g.em, "f1": g.f1, "n": g.count}
                for hops, g in sorted(self.per_hop.items())
            },
        }
        if self.probe_stats is not None:
            out["probe"] = {
                str(hops): {"mean": s.mean, "min": s.min, "max": s.max}
                for hops, s in sorted(self.probe_stats.items())
            }
        return out


def aggregate_report(
    results: Sequence[tuple[RetrievalResult, MultiHopExample]],
    probe_scores: Sequence[tuple[int, float]] | None = None,
) -> MetricsReport:
    """Mean EM/F1 over per-question scores, overall and grouped by hop count.

    ``probe_scores`` are optional (gold_hops, score) pairs from the
    additional-hop probe, summarized per hop count.
    """
    if not results:
        raise ValueError("nothing to aggregate")
    rows: list[tuple[int, int, float]] = []
    for result, example in results:
        predicted = set(result.chain.prefix)
        em = retrieval_em(predicted, example.gold_set)
        f1 = retrieval_f1(predicted, example.gold_set)
        hops = example.gold_hops() or len(example.gold_set)
        rows.append((hops, em, f1))

    def summarize(group: list[tuple[int, int, float]]) -> GroupMetrics:
        return GroupMetrics(
            em=sum(r[1] for r in group) / len(group),
            f1=sum(r[2] for r in group) / len(group),
            count=len(group),
        )

    overall = summarize(rows)
    per_hop = {
        hops: summarize([r for r in rows if r[0] == hops])
        for hops in sorted({r[0] for r in rows})
    }
    probe_stats = None
    if probe_scores:
        probe_stats = {}
        for hops in sorted({h for h, _ in probe_scores}):
            values = [s for h, s in probe_scores if h == hops]
            probe_stats[hops] = ProbeStats(
                mean=sum(values) / len(values), min=min(values), max=max(values)
            )
    return MetricsReport(overall.em, overall.f1, overall.count, per_hop, probe_stats)
