"""Dataset ingestion and canonical on-disk formats.

Canonical records are JSONL with sorted keys, one example per line::

    {"qid": "...", "question": "...",
     "candidates": [{"id": "...", "title": "...", "text": "..."}, ...],
     "gold_chain": ["id", ...] | null, "gold_set": ["id", ...],
     "answer": "..." | null, "hops": k | null}

Unknown top-level fields are preserved and re-emitted on rewrite, so foreign
annotations survive a normalize cycle.

Source adapters:

==============  =====================================================================
format          field mapping
==============  =====================================================================
hotpot_style    JSON array; ``_id``/``question``/``answer``; ``context`` is a list of
                ``[title, [sentences]]`` pairs (passage id = title, body = joined
                sentences); passage-level gold = distinct ``supporting_facts`` titles.
twowiki_style   same layout as hotpot_style.
musique_style   JSONL; ``id``/``question``/``answer``; ``paragraphs`` with ``idx``/
                ``title``/``paragraph_text`` (passage id = str(idx)); ordered gold
                chain from ``question_decomposition`` ``paragraph_support_idx``,
                falling back to ``is_supporting`` flags as an unordered set.
==============  =====================================================================

Supporting facts are sentence-level in the sources; only passage-level gold
is extracted, because the engine retrieves passages.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .engine import RetrievalResult, StopReason
from .errors import IncompleteManifest, ParseError, ValidationError
from .types import (
    CandidateSet,
    ChainHypothesis,
    MultiHopExample,
    Passage,
    Question,
    validate_example,
)

log = logging.getLogger(__name__)

INGEST_FORMATS = ("hotpot_style", "musique_style", "twowiki_style")

_CANONICAL_KEYS = {"qid", "question", "candidates", "gold_chain", "gold_set", "answer", "hops"}


# ---------------------------------------------------------------------------
# canonical records


def record_from_example(example: MultiHopExample) -> dict:
    record = {
        "qid": example.question.id,
        "question": example.question.text,
        "candidates": [
            {"id": p.id, "title": p.title, "text": p.body} for p in example.candidates
        ],
        "gold_chain": list(example.gold_chain) if example.gold_chain is not None else None,
        "gold_set": sorted(example.gold_set),
        "answer": example.answer,
        "hops": example.hop_count,
    }
    record.update(example.extras)
    return record


def example_from_record(record: dict) -> MultiHopExample:
    candidates = CandidateSet(
        tuple(
            Passage(str(c["id"]), str(c.get("title", "")), str(c.get("text", "")))
            for c in record["candidates"]
        )
    )
    gold_chain = record.get("gold_chain")
    extras = {k: v for k, v in record.items() if k not in _CANONICAL_KEYS}
    return MultiHopExample(
        question=Question(str(record["qid"]), str(record["question"])),
        candidates=candidates,
        gold_chain=tuple(gold_chain) if gold_chain is not None else None,
        gold_set=frozenset(record.get("gold_set", [])),
        answer=record.get("answer"),
        hop_count=record.get("hops"),
        extras=extras,
    )


def write_canonical(examples: Iterable[MultiHopExample], path: str | Path) -> int:
    """One sorted-keys JSON object per line; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(
                json.dumps(record_from_example(example), sort_keys=True, ensure_ascii=False)
            )
            handle.write("\n")
            count += 1
    return count


def read_canonical(path: str | Path) -> list[MultiHopExample]:
    examples: list[MultiHopExample] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                examples.append(example_from_record(record))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{line_no}: {exc}") from exc
    return examples


# ---------------------------------------------------------------------------
# source adapters


def ingest_distractor(
    path: str | Path,
    format: str,
    strict: bool = True,
) -> list[MultiHopExample]:
    """Read a source dataset into validated examples.

    In strict mode any invariant violation aborts with ValidationError; with
    ``strict=False`` offending records are skipped with a warning.
    """
    if format not in INGEST_FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {INGEST_FORMATS}")
    if format == "musique_style":
        raw_records = _read_jsonl_records(path)
    else:
        raw_records = _read_json_array(path)

    examples: list[MultiHopExample] = []
    for context, record in raw_records:
        try:
            if format == "musique_style":
                example = _example_from_musique(record)
            else:
                example = _example_from_hotpot(record)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{context}: malformed record: {exc}") from exc
        violations = validate_example(example)
        if violations:
            message = f"{context} (qid {example.question.id!r}): " + "; ".join(violations)
            if strict:
                raise ValidationError(message)
            log.warning("skipping invalid record: %s", message)
            continue
        examples.append(example)
    return examples


def _read_json_array(path: str | Path) -> list[tuple[str, dict]]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at byte offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a top-level JSON array")
    return [(f"{path}: record {i}", record) for i, record in enumerate(data)]


def _read_jsonl_records(path: str | Path) -> list[tuple[str, dict]]:
    records: list[tuple[str, dict]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append((f"{path}:{line_no}", json.loads(line)))
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"{path}:{line_no}: invalid JSON at byte offset {exc.pos}: {exc.msg}"
                ) from exc
    return records


def _example_from_hotpot(record: dict) -> MultiHopExample:
    passages = tuple(
        Passage(id=title, title=title, body=" ".join(sentences))
        for title, sentences in record["context"]
    )
    gold_titles = []
    for title, _sentence_id in record.get("supporting_facts", []):
        if title not in gold_titles:
            gold_titles.append(title)
    return MultiHopExample(
        question=Question(str(record["_id"]), str(record["question"])),
        candidates=CandidateSet(passages),
        gold_chain=None,
        gold_set=frozenset(gold_titles),
        answer=record.get("answer"),
        hop_count=len(gold_titles) or None,
    )


def _example_from_musique(record: dict) -> MultiHopExample:
    passages = tuple(
        Passage(
            id=str(p["idx"]),
            title=str(p.get("title", "")),
            body=str(p.get("paragraph_text", "")),
        )
        for p in record["paragraphs"]
    )
    decomposition = record.get("question_decomposition") or []
    gold_chain = None
    if decomposition:
        gold_chain = tuple(str(step["paragraph_support_idx"]) for step in decomposition)
    gold_set = frozenset(gold_chain) if gold_chain else frozenset(
        str(p["idx"]) for p in record["paragraphs"] if p.get("is_supporting")
    )
    return MultiHopExample(
        question=Question(str(record["id"]), str(record["question"])),
        candidates=CandidateSet(passages),
        gold_chain=gold_chain,
        gold_set=gold_set,
        answer=record.get("answer"),
        hop_count=len(gold_chain) if gold_chain else (len(gold_set) or None),
    )


# ---------------------------------------------------------------------------
# run manifests


def result_record(question_id: str, result: RetrievalResult) -> dict:
    return {
        "qid": question_id,
        "chain": list(result.chain.prefix),
        "score": result.chain.score,
        "hops_taken": result.hops_taken,
        "per_hop_best_score": list(result.per_hop_best_score),
        "stop_reason": result.stop_reason.value,
        "forced_min_hop": result.forced_min_hop,
    }


def result_from_record(record: dict) -> RetrievalResult:
    chain = ChainHypothesis(tuple(record["chain"]), record["score"])
    return RetrievalResult(
        chain=chain,
        hops_taken=record["hops_taken"],
        per_hop_best_score=tuple(record["per_hop_best_score"]),
        stop_reason=StopReason(record["stop_reason"]),
        forced_min_hop=record.get("forced_min_hop", False),
    )


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to re-run and audit one retrieval run.

    ``results`` keeps dataset input order and must cover every input
    question exactly once. ``duration_seconds`` is the one field that varies
    between otherwise identical runs; determinism checks should ignore it.
    """

    config: dict
    engine_version: str
    duration_seconds: float
    question_ids: tuple[str, ...]
    results: tuple[dict, ...]
    metrics: dict

    def validate(self) -> None:
        seen = [record["qid"] for record in self.results]
        if sorted(seen) != sorted(self.question_ids) or len(set(seen)) != len(seen):
            missing = set(self.question_ids) - set(seen)
            extra = set(seen) - set(self.question_ids)
            raise IncompleteManifest(
                f"manifest does not cover the input exactly once "
                f"(missing {sorted(missing)}, unexpected {sorted(extra)})"
            )

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "engine_version": self.engine_version,
            "duration_seconds": self.duration_seconds,
            "question_ids": list(self.question_ids),
            "results": list(self.results),
            "metrics": self.metrics,
        }


def write_run_manifest(manifest: RunManifest, path: str | Path) -> None:
    """Single JSON document, sorted keys, refuses incomplete manifests."""
    manifest.validate()
    Path(path).write_text(
        json.dumps(manifest.to_json_dict(), sort_keys=True, ensure_ascii=False, indent=2)
        + "\n",
        encoding="utf-8",
    )


def read_run_manifest(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at byte offset {exc.pos}: {exc.msg}") from exc
