"""Training-signal generation: per-hop labels, losses and sequence emission.

Hop 1 emits one labeled sequence per candidate; every later hop t emits one
per (tracked beam hypothesis, unused candidate) pair, where the tracked beams
are the scorer's own top-B chains, exactly as at inference time. Labels
depend only on the candidate: in ordered mode the single correct next passage
is positive, in unordered mode any gold passage is.

Losses treat each sequence score as the logit of an independent two-class
(irrelevant/relevant) decision; the per-hop loss is the summed binary
cross-entropy and the total loss is the plain sum over hops.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .engine import select_top
from .errors import EmptyBatch, MissingGold, MissingGoldOrder
from .scoring import Head, Scorer, ScoreRequest, score_batch
from .types import Beam, ChainHypothesis, ExpansionSet, MultiHopExample


@dataclass(frozen=True)
class LabeledSequence:
    """One (head, prefix, candidate) sequence with its 0/1 label and score."""

    head: Head
    prefix: tuple[str, ...]
    candidate: str
    label: int
    score: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.candidate in self.prefix:
            raise ValueError(f"candidate {self.candidate!r} already in prefix")
        if len(set(self.prefix)) != len(self.prefix):
            raise ValueError(f"prefix contains duplicates: {self.prefix}")


@dataclass(frozen=True)
class SupervisionBatch:
    """All labeled sequences for one example, grouped by hop."""

    question_id: str
    per_hop: tuple[tuple[LabeledSequence, ...], ...]
    per_hop_loss: tuple[float, ...]
    total_loss: float

    def sequences(self) -> Iterable[LabeledSequence]:
        for hop_sequences in self.per_hop:
            yield from hop_sequences


def assign_label(
    candidate_id: str,
    hop: int,
    example: MultiHopExample,
    ordered: bool,
) -> int:
    """0/1 relevance label for ``candidate_id`` at 1-based ``hop``.

    Ordered mode: positive iff the candidate is the hop-th gold passage.
    Unordered mode: positive iff the candidate is any gold passage.
    """
    if ordered:
        if example.gold_chain is None:
            raise MissingGoldOrder(
                f"question {example.question.id} has no ordered gold chain"
            )
        if not 1 <= hop <= len(example.gold_chain):
            raise ValueError(
                f"hop {hop} outside gold chain of length {len(example.gold_chain)}"
            )
        return int(candidate_id == example.gold_chain[hop - 1])
    if not example.gold_set:
        raise MissingGold(f"question {example.question.id} has no gold passages")
    return int(candidate_id in example.gold_set)


def hop_loss(sequences: Sequence[LabeledSequence]) -> float:
    """Summed binary cross-entropy of the hop's sequences.

    Uses the overflow-safe form max(s,0) - s*l + log(1 + exp(-|s|)), which
    equals -[l*ln(sigmoid(s)) + (1-l)*ln(1-sigmoid(s))] for finite logits.
    """
    if not sequences:
        raise EmptyBatch("hop loss over zero sequences")
    total = 0.0
    for seq in sequences:
        if not math.isfinite(seq.score):
            raise ValueError(f"non-finite score {seq.score} in loss batch")
        s, label = seq.score, seq.label
        total += max(s, 0.0) - s * label + math.log1p(math.exp(-abs(s)))
    return total


def total_loss(per_hop_losses: Sequence[float]) -> float:
    """Sum of the per-hop losses; empty input sums to zero."""
    for value in per_hop_losses:
        if value < 0:
            raise ValueError(f"hop losses must be non-negative, got {value}")
    return float(sum(per_hop_losses))


def shuffle_prefix(prefix: Sequence[str], seed: int) -> tuple[str, ...]:
    """Seed-deterministic permutation of the prefix ids."""
    out = list(prefix)
    random.Random(seed).shuffle(out)
    return tuple(out)


def _derived_seed(base_seed: int, question_id: str, hop: int, prefix: Sequence[str]) -> int:
    key = f"{base_seed}|{question_id}|{hop}|{'|'.join(prefix)}"
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def emit_training_batch(
    example: MultiHopExample,
    scorer: Scorer,
    beam_size: int,
    ordered: bool,
    shuffle_seed: int | None = None,
    gold_forcing: bool = False,
) -> SupervisionBatch:
    """Generate the labeled sequences and losses for one example.

    The hop count is taken from the gold labels (chain length, or gold-set
    size in unordered mode), never from threshold stopping. ``gold_forcing``
    inserts the gold prefix into each later hop's beam when the scorer's own
    top-B dropped it, evicting the lowest-scoring hypothesis; it requires an
    ordered gold chain. When ``shuffle_seed`` is set, each tracked prefix is
    emitted (and scored) in a seed-deterministic shuffled order.
    """
    if ordered and example.gold_chain is None:
        raise MissingGoldOrder(f"question {example.question.id} has no ordered gold chain")
    if gold_forcing and example.gold_chain is None:
        raise MissingGoldOrder("gold_forcing requires an ordered gold chain")
    hops = example.gold_hops()
    if not hops:
        raise MissingGold(f"question {example.question.id} has no gold labels")
    question = example.question
    candidates = example.candidates

    per_hop: list[tuple[LabeledSequence, ...]] = []

    # hop 1: every candidate, first-hop head
    requests = [
        ScoreRequest(Head.FIRST_HOP, question, (), p) for p in candidates
    ]
    scores = score_batch(scorer, requests)
    per_hop.append(
        tuple(
            LabeledSequence(Head.FIRST_HOP, (), p.id, assign_label(p.id, 1, example, ordered), s)
            for p, s in zip(candidates, scores)
        )
    )
    items = tuple(
        ChainHypothesis((p.id,), s, 1) for p, s in zip(candidates, scores)
    )
    beam = select_top(ExpansionSet(1, items), beam_size)

    for hop in range(2, hops + 1):
        if gold_forcing:
            beam = _force_gold_prefix(beam, example, scorer, beam_size, hop)
        hop_sequences: list[LabeledSequence] = []
        extensions: list[ChainHypothesis] = []
        pending: list[tuple[ChainHypothesis, tuple[str, ...], str]] = []
        batch: list[ScoreRequest] = []
        for hyp in beam.hypotheses:
            if shuffle_seed is not None:
                emitted_prefix = shuffle_prefix(
                    hyp.prefix, _derived_seed(shuffle_seed, question.id, hop, hyp.prefix)
                )
            else:
                emitted_prefix = hyp.prefix
            prefix_passages = tuple(candidates.get(pid) for pid in emitted_prefix)
            for passage in candidates:
                if passage.id in hyp.prefix:
                    continue
                pending.append((hyp, emitted_prefix, passage.id))
                batch.append(
                    ScoreRequest(Head.LATER_HOP, question, prefix_passages, passage)
                )
        scores = score_batch(scorer, batch)
        for (hyp, emitted_prefix, candidate_id), score in zip(pending, scores):
            hop_sequences.append(
                LabeledSequence(
                    Head.LATER_HOP,
                    emitted_prefix,
                    candidate_id,
                    assign_label(candidate_id, hop, example, ordered),
                    score,
                )
            )
            extensions.append(
                ChainHypothesis(hyp.prefix + (candidate_id,), score, hop)
            )
        per_hop.append(tuple(hop_sequences))
        if hop < hops:
            beam = select_top(ExpansionSet(hop, tuple(extensions)), beam_size)

    losses = tuple(hop_loss(seqs) for seqs in per_hop)
    return SupervisionBatch(question.id, tuple(per_hop), losses, total_loss(losses))


def _force_gold_prefix(
    beam: Beam,
    example: MultiHopExample,
    scorer: Scorer,
    beam_size: int,
    hop: int,
) -> Beam:
    """Ensure the length-(hop-1) gold prefix is among the tracked hypotheses."""
    gold_prefix = tuple(example.gold_chain[: hop - 1])
    if gold_prefix in beam.prefixes():
        return beam
    head = Head.FIRST_HOP if len(gold_prefix) == 1 else Head.LATER_HOP
    request = ScoreRequest(
        head,
        example.question,
        tuple(example.candidates.get(pid) for pid in gold_prefix[:-1]),
        example.candidates.get(gold_prefix[-1]),
    )
    score = score_batch(scorer, [request])[0]
    hypotheses = list(beam.hypotheses)
    if len(hypotheses) >= beam_size:
        hypotheses = hypotheses[:-1]  # sorted best-first: drop the worst
    hypotheses.append(ChainHypothesis(gold_prefix, score, len(gold_prefix)))
    hypotheses.sort(key=lambda h: h.sort_key)
    return Beam(beam.hop, tuple(hypotheses))


def sequence_record(question_id: str, hop: int, sequence: LabeledSequence) -> dict:
    return {
        "qid": question_id,
        "hop": hop,
        "head": int(sequence.head),
        "prefix": list(sequence.prefix),
        "candidate": sequence.candidate,
        "label": sequence.label,
        "score": sequence.score,
    }


def write_supervision_jsonl(batches: Iterable[SupervisionBatch], path: str | Path) -> int:
    """One JSON object per labeled sequence, in (example, hop, emission)
    order; returns the number of lines written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for batch in batches:
            for hop_index, hop_sequences in enumerate(batch.per_hop, start=1):
                for sequence in hop_sequences:
                    record = sequence_record(batch.question_id, hop_index, sequence)
                    handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
                    handle.write("\n")
                    count += 1
    return count
