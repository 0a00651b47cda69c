"""Command-line interface.

Subcommands: ingest, retrieve, evaluate, rerank, train-signal, probe, sweep.
Options can come from a JSON config file (--config); explicit flags win.
Exit codes: 0 success, 1 data validation failure, 2 scorer unavailable,
3 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import MISSING, dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .dataset import (
    INGEST_FORMATS,
    RunManifest,
    ingest_distractor,
    read_canonical,
    read_run_manifest,
    result_from_record,
    result_record,
    write_canonical,
    write_run_manifest,
)
from .engine import FixedHops, SearchConfig, Threshold, retrieve, rerank_chains
from .errors import (
    ChainTooShort,
    EmptyCandidateSet,
    EmptyChainList,
    EmptyGold,
    IncompleteManifest,
    MissingGold,
    NoLegalExpansion,
    ParseError,
    ScorerUnavailable,
    UsageError,
    ValidationError,
)
from .evaluation import ProbeStats, additional_hop_probe, aggregate_report, chain_top2_em
from .remote import RemoteScorer
from .report import (
    plot_hop_breakdown,
    plot_sweep,
    render_metrics_table,
    render_probe_table,
    render_sweep_table,
    write_metrics_csv,
    write_probe_csv,
    write_sweep_csv,
)
from .scoring import LexicalScorer, LookupScorer, LookupTable, Scorer, default_threshold
from .supervision import emit_training_batch, write_supervision_jsonl
from .types import MultiHopExample, Passage, Question, validate_example

log = logging.getLogger(__name__)

COMMANDS = ("ingest", "retrieve", "evaluate", "rerank", "train-signal", "probe", "sweep")


@dataclass
class CliConfig:
    """Resolved options for one run: config-file values overridden by flags."""

    command: str
    dataset: str | None = None
    out: str | None = None
    scorer: str = "lexical"
    beam_size: int = 1
    mode: str = "auto"
    min_hops: int = 1
    max_hops: int = 8
    seed: int = 0
    strict: bool = True
    workers: int = 4
    timeout: float = 10.0
    retries: int = 2
    figures: bool = True
    format: str | None = None
    manifest: str | None = None
    beam_sizes: str = "1,2,3,4"
    ordered: str = "auto"
    shuffle_seed: int | None = None
    gold_forcing: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); 2 is taken
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="chainbeam", description=__doc__)
    parser.add_argument("--version", action="version", version=f"chainbeam {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p: _Parser) -> None:
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--dataset", help="input dataset path")
        p.add_argument("--out", help="output directory (created if absent)")
        p.add_argument("--scorer", help="lexical | lookup:<path> | remote[:<url>]")
        p.add_argument("--beam-size", dest="beam_size", type=int)
        p.add_argument("--mode", help="fixed:<k> | threshold:<tau> | auto")
        p.add_argument("--min-hops", dest="min_hops", type=int)
        p.add_argument("--max-hops", dest="max_hops", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--workers", type=int)
        p.add_argument("--timeout", type=float, help="remote scorer timeout, seconds")
        p.add_argument("--retries", type=int, help="remote scorer retry count")
        p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--verbose", action="store_true")

    p_ingest = sub.add_parser("ingest", help="normalize a source dataset")
    common(p_ingest)
    p_ingest.add_argument("--format", choices=INGEST_FORMATS)

    for name, help_text in [
        ("retrieve", "run chain retrieval and write a run manifest"),
        ("evaluate", "score a run manifest against gold labels"),
        ("rerank", "rerank externally retrieved chains"),
        ("train-signal", "emit labeled training sequences and losses"),
        ("probe", "score one hop past the gold hop count"),
        ("sweep", "retrieve+evaluate across several beam sizes"),
    ]:
        p = sub.add_parser(name, help=help_text)
        common(p)
        if name == "evaluate":
            p.add_argument("--manifest", help="manifest.json from a retrieve run")
        if name == "sweep":
            p.add_argument("--beam-sizes", dest="beam_sizes", help="comma list, e.g. 1,2,3,4")
        if name == "train-signal":
            p.add_argument("--ordered", choices=["auto", "ordered", "unordered"])
            p.add_argument("--shuffle-seed", dest="shuffle_seed", type=int)
            p.add_argument(
                "--gold-forcing",
                dest="gold_forcing",
                action=argparse.BooleanOptionalAction,
                default=None,
            )
    return parser


def config_from_args(args: argparse.Namespace) -> CliConfig:
    if not args.command:
        raise UsageError(f"missing command, expected one of {', '.join(COMMANDS)}")
    defaults = {
        f.name: f.default for f in fields(CliConfig) if f.default is not MISSING
    }
    values = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            file_values = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise UsageError(f"config file not found: {config_path}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {config_path} is not valid JSON: {exc}") from exc
        unknown = set(file_values) - set(defaults) - {"command"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    for key, value in vars(args).items():
        if key in ("config", "verbose", "command"):
            continue
        if value is not None:
            values[key] = value
    values["command"] = args.command
    return CliConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        config = config_from_args(args)
        return run(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except ScorerUnavailable as exc:
        print(f"scorer unavailable: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValidationError, IncompleteManifest, EmptyGold, MissingGold,
            EmptyCandidateSet, EmptyChainList, ChainTooShort) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1


def run(config: CliConfig) -> int:
    """Execute one command; raises on failure, returns 0 on success."""
    handlers: dict[str, Callable[[CliConfig], None]] = {
        "ingest": _cmd_ingest,
        "retrieve": _cmd_retrieve,
        "evaluate": _cmd_evaluate,
        "rerank": _cmd_rerank,
        "train-signal": _cmd_train_signal,
        "probe": _cmd_probe,
        "sweep": _cmd_sweep,
    }
    handlers[config.command](config)
    return 0


# ---------------------------------------------------------------------------
# shared plumbing


def _out_dir(config: CliConfig) -> Path:
    if not config.out:
        raise UsageError("--out is required")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_dataset(config: CliConfig) -> Path:
    if not config.dataset:
        raise UsageError("--dataset is required")
    path = Path(config.dataset)
    if not path.exists():
        raise UsageError(f"dataset not found: {path}")
    return path


def _load_examples(config: CliConfig) -> list[MultiHopExample]:
    path = _require_dataset(config)
    examples = read_canonical(path)
    if not examples:
        raise ValidationError(f"dataset is empty: {path}")
    if config.strict:
        for example in examples:
            violations = validate_example(example)
            if violations:
                raise ValidationError(
                    f"qid {example.question.id!r}: " + "; ".join(violations)
                )
    return examples


def build_scorer(config: CliConfig) -> Scorer:
    spec = config.scorer
    if spec == "lexical":
        return LexicalScorer()
    if spec.startswith("lookup:"):
        path = Path(spec.split(":", 1)[1])
        if not path.exists():
            raise UsageError(f"lookup table not found: {path}")
        return LookupScorer(LookupTable.load(path))
    if spec == "remote" or spec.startswith("remote:"):
        url = spec.split(":", 1)[1] if ":" in spec else None
        return RemoteScorer(url, timeout=config.timeout, retries=config.retries)
    raise UsageError(f"unknown scorer spec {spec!r}")


def build_search_config(config: CliConfig, scorer: Scorer) -> tuple[SearchConfig, str]:
    """Search config plus its normalized mode string for the manifest."""
    mode_spec = config.mode
    if mode_spec == "auto":
        tau = default_threshold(scorer)
        mode, mode_str = Threshold(tau), f"threshold:{tau}"
    elif mode_spec.startswith("fixed:"):
        hops = int(mode_spec.split(":", 1)[1])
        mode, mode_str = FixedHops(hops), f"fixed:{hops}"
    elif mode_spec.startswith("threshold:"):
        tau = float(mode_spec.split(":", 1)[1])
        mode, mode_str = Threshold(tau), f"threshold:{tau}"
    else:
        raise UsageError(f"unknown mode {mode_spec!r}")
    try:
        search = SearchConfig(config.beam_size, mode, config.min_hops, config.max_hops)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return search, mode_str


def _map_ordered(fn, items, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands


def _cmd_ingest(config: CliConfig) -> None:
    if not config.format:
        raise UsageError("--format is required for ingest")
    out = _out_dir(config)
    examples = ingest_distractor(_require_dataset(config), config.format, config.strict)
    target = out / "canonical.jsonl"
    count = write_canonical(examples, target)
    print(f"ingested {count} examples -> {target}")


def _run_retrieval(
    examples: list[MultiHopExample],
    scorer: Scorer,
    search: SearchConfig,
    mode_str: str,
    config: CliConfig,
    out: Path,
) -> dict:
    """Retrieve every example, write the manifest, return its JSON dict."""
    started = time.perf_counter()
    results = _map_ordered(lambda e: retrieve(e, scorer, search), examples, config.workers)
    duration = time.perf_counter() - started
    records = tuple(
        result_record(example.question.id, result)
        for example, result in zip(examples, results)
    )
    metrics: dict = {}
    if examples and all(e.gold_set for e in examples):
        metrics = aggregate_report(list(zip(results, examples))).to_json_dict()
    manifest = RunManifest(
        config={
            "command": "retrieve",
            "dataset": str(config.dataset),
            "scorer": config.scorer,
            "beam_size": search.beam_size,
            "mode": mode_str,
            "min_hops": search.min_hops,
            "max_hops": search.max_hops,
            "seed": config.seed,
        },
        engine_version=__version__,
        duration_seconds=duration,
        question_ids=tuple(e.question.id for e in examples),
        results=records,
        metrics=metrics,
    )
    write_run_manifest(manifest, out / "manifest.json")
    return manifest.to_json_dict()


def _cmd_retrieve(config: CliConfig) -> None:
    out = _out_dir(config)
    examples = _load_examples(config)
    scorer = build_scorer(config)
    search, mode_str = build_search_config(config, scorer)
    manifest = _run_retrieval(examples, scorer, search, mode_str, config, out)
    overall = manifest["metrics"].get("overall") if manifest["metrics"] else None
    summary = f"retrieved {len(examples)} questions (beam {search.beam_size}, {mode_str})"
    if overall:
        summary += f"  EM {overall['em']:.4f}  F1 {overall['f1']:.4f}"
    print(summary)
    print(f"manifest -> {out / 'manifest.json'}")


def _paired_results(manifest: dict, examples: list[MultiHopExample]):
    by_qid = {record["qid"]: record for record in manifest["results"]}
    pairs = []
    for example in examples:
        record = by_qid.get(example.question.id)
        if record is None:
            raise IncompleteManifest(
                f"manifest has no result for question {example.question.id!r}"
            )
        pairs.append((result_from_record(record), example))
    return pairs


def _cmd_evaluate(config: CliConfig) -> None:
    if not config.manifest:
        raise UsageError("--manifest is required for evaluate")
    out = _out_dir(config)
    manifest = read_run_manifest(config.manifest)
    examples = _load_examples(config)
    report = aggregate_report(_paired_results(manifest, examples))
    (out / "metrics.json").write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    write_metrics_csv(report, out / "metrics.csv")
    table = render_metrics_table(report)
    (out / "metrics.txt").write_text(table, encoding="utf-8")
    if config.figures:
        plot_hop_breakdown(report, out / "metrics.png")
    print(table, end="")


def _cmd_rerank(config: CliConfig) -> None:
    out = _out_dir(config)
    scorer = build_scorer(config)
    path = _require_dataset(config)
    ranked_lines: list[str] = []
    top2_flags: list[int] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                question = Question(str(record["qid"]), str(record["question"]))
                chains = [
                    [Passage(str(p["id"]), str(p.get("title", "")), str(p.get("text", "")))
                     for p in chain]
                    for chain in record["chains"]
                ]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{line_no}: {exc}") from exc
            ranking = rerank_chains(question, chains, scorer)
            ranked_lines.append(
                json.dumps(
                    {
                        "qid": question.id,
                        "ranking": [
                            {"chain": [p.id for p in chain], "score": score}
                            for chain, score in ranking
                        ],
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
            gold = record.get("gold_set") or []
            if len(gold) == 2:
                top2_flags.append(chain_top2_em(ranking, gold))
    (out / "reranked.jsonl").write_text(
        "".join(line + "\n" for line in ranked_lines), encoding="utf-8"
    )
    summary: dict = {"questions": len(ranked_lines)}
    if top2_flags:
        summary["top2_em"] = sum(top2_flags) / len(top2_flags)
        summary["top2_n"] = len(top2_flags)
    (out / "rerank_report.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    message = f"reranked {len(ranked_lines)} questions"
    if top2_flags:
        message += f"  top-2 EM {summary['top2_em']:.4f} over {len(top2_flags)}"
    print(message)


def _cmd_train_signal(config: CliConfig) -> None:
    out = _out_dir(config)
    examples = _load_examples(config)
    scorer = build_scorer(config)
    if config.ordered == "auto":
        ordered = all(e.gold_chain is not None for e in examples)
    else:
        ordered = config.ordered == "ordered"
    batches = _map_ordered(
        lambda e: emit_training_batch(
            e,
            scorer,
            config.beam_size,
            ordered,
            shuffle_seed=config.shuffle_seed,
            gold_forcing=config.gold_forcing,
        ),
        examples,
        config.workers,
    )
    count = write_supervision_jsonl(batches, out / "supervision.jsonl")
    summary = {
        "questions": len(batches),
        "sequences": count,
        "ordered": ordered,
        "beam_size": config.beam_size,
        "shuffle_seed": config.shuffle_seed,
        "gold_forcing": config.gold_forcing,
        "total_loss_sum": sum(b.total_loss for b in batches),
        "per_question": [
            {
                "qid": b.question_id,
                "per_hop_loss": list(b.per_hop_loss),
                "total_loss": b.total_loss,
            }
            for b in batches
        ],
    }
    (out / "supervision_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"emitted {count} labeled sequences for {len(batches)} questions")


def _cmd_probe(config: CliConfig) -> None:
    out = _out_dir(config)
    examples = _load_examples(config)
    scorer = build_scorer(config)
    search = SearchConfig(config.beam_size, FixedHops(1), 1, config.max_hops)
    probe_scores: list[tuple[int, float]] = []
    skipped = 0
    for example in examples:
        hops = example.gold_hops()
        if not hops:
            skipped += 1
            continue
        try:
            score = additional_hop_probe(example, scorer, search, hops)
        except NoLegalExpansion:
            skipped += 1
            continue
        probe_scores.append((hops, score))
    if not probe_scores:
        raise MissingGold("no question could be probed (missing gold hops or exhausted)")
    report = aggregate_probe(probe_scores)
    (out / "probe.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    stats = {
        int(h): ProbeStats(v["mean"], v["min"], v["max"]) for h, v in report["probe"].items()
    }
    write_probe_csv(stats, out / "probe.csv")
    table = render_probe_table(stats)
    (out / "probe.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    if skipped:
        log.warning("skipped %d questions without a usable gold hop count", skipped)


def aggregate_probe(probe_scores: list[tuple[int, float]]) -> dict:
    probe: dict[str, dict] = {}
    for hops in sorted({h for h, _ in probe_scores}):
        values = [s for h, s in probe_scores if h == hops]
        probe[str(hops)] = {
            "mean": sum(values) / len(values),
            "min": min(values),
            "max": max(values),
        }
    return {"probe": probe, "n": len(probe_scores)}


def _cmd_sweep(config: CliConfig) -> None:
    out = _out_dir(config)
    examples = _load_examples(config)
    if not all(e.gold_set for e in examples):
        raise EmptyGold("sweep needs gold labels on every question")
    scorer = build_scorer(config)
    try:
        sizes = [int(part) for part in config.beam_sizes.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --beam-sizes {config.beam_sizes!r}") from exc
    if not sizes:
        raise UsageError("--beam-sizes is empty")
    rows = []
    for beam_size in sizes:
        sub_config = CliConfig(**{**vars(config), "beam_size": beam_size})
        search, mode_str = build_search_config(sub_config, scorer)
        sub_out = out / f"b{beam_size}"
        sub_out.mkdir(parents=True, exist_ok=True)
        manifest = _run_retrieval(examples, scorer, search, mode_str, sub_config, sub_out)
        overall = manifest["metrics"]["overall"]
        rows.append(
            {
                "beam_size": beam_size,
                "em": overall["em"],
                "f1": overall["f1"],
                "n": overall["n"],
            }
        )
    (out / "sweep.json").write_text(
        json.dumps(rows, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    write_sweep_csv(rows, out / "sweep.csv")
    table = render_sweep_table(rows)
    (out / "sweep.txt").write_text(table, encoding="utf-8")
    if config.figures:
        plot_sweep(rows, out / "sweep.png")
    print(table, end="")


if __name__ == "__main__":
    sys.exit(main())
