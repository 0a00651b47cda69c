"""Deterministic lexical scoring, mirroring the engine's built-in rule.

Tokenization: lowercase, split on every non-alphanumeric character. The
score of a (question, chain, candidate) sequence is the containment of the
candidate's token set in the question-plus-chain token set. A real
cross-encoder implementation would replace this module and nothing else.
"""

from __future__ import annotations

from itertools import groupby
from typing import Iterable


def tokenize(text: str) -> list[str]:
    return ["".join(run) for alnum, run in groupby(text.lower(), key=str.isalnum) if alnum]


def containment_score(
    question: str,
    chain: Iterable[tuple[str, str]],
    candidate: tuple[str, str],
) -> float:
    """|candidate tokens ∩ context tokens| / |candidate tokens|.

    ``chain`` and ``candidate`` are (title, text) pairs; title tokens count
    like text tokens. Raises ValueError when the candidate has no tokens.
    """
    cand_title, cand_text = candidate
    candidate_tokens = set(tokenize(cand_title)) | set(tokenize(cand_text))
    if not candidate_tokens:
        raise ValueError("candidate has no tokens")
    context = set(tokenize(question))
    for title, text in chain:
        context.update(tokenize(title))
        context.update(tokenize(text))
    return len(candidate_tokens & context) / len(candidate_tokens)
