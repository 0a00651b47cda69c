"""Report rendering: aligned text tables, CSV and matplotlib figures.

matplotlib is imported lazily so commands that never render a figure stay
fast; figures always go through the Agg backend and are written to files.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from .evaluation import MetricsReport


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def render_metrics_table(report: MetricsReport) -> str:
    rows = [
        [str(hops), f"{g.em:.4f}", f"{g.f1:.4f}", str(g.count)]
        for hops, g in sorted(report.per_hop.items())
    ]
    rows.append(["all", f"{report.retrieval_em:.4f}", f"{report.retrieval_f1:.4f}", str(report.count)])
    return _table(["hops", "EM", "F1", "n"], rows)


def write_metrics_csv(report: MetricsReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["group", "em", "f1", "n"])
        for hops, g in sorted(report.per_hop.items()):
            writer.writerow([hops, g.em, g.f1, g.count])
        writer.writerow(["all", report.retrieval_em, report.retrieval_f1, report.count])


def render_sweep_table(rows: Sequence[dict]) -> str:
    """One row per beam size with the aggregate EM/F1 of that run."""
    body = [
        [str(r["beam_size"]), f"{r['em']:.4f}", f"{r['f1']:.4f}", str(r["n"])]
        for r in rows
    ]
    return _table(["beam size", "EM", "F1", "n"], body)


def write_sweep_csv(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["beam_size", "em", "f1", "n"])
        for r in rows:
            writer.writerow([r["beam_size"], r["em"], r["f1"], r["n"]])


def render_probe_table(probe: dict[int, object]) -> str:
    rows = [
        [str(hops), f"{s.mean:.4f}", f"{s.min:.4f}", f"{s.max:.4f}"]
        for hops, s in sorted(probe.items())
    ]
    return _table(["hops", "mean", "min", "max"], rows)


def write_probe_csv(probe: dict[int, object], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["hops", "mean", "min", "max"])
        for hops, s in sorted(probe.items()):
            writer.writerow([hops, s.mean, s.min, s.max])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_hop_breakdown(report: MetricsReport, path: str | Path) -> None:
    """Bar chart of EM and F1 per gold hop count."""
    plt = _pyplot()
    hops = sorted(report.per_hop)
    em = [report.per_hop[h].em for h in hops]
    f1 = [report.per_hop[h].f1 for h in hops]
    x = range(len(hops))
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.38
    ax.bar([i - width / 2 for i in x], em, width, label="EM")
    ax.bar([i + width / 2 for i in x], f1, width, label="F1")
    ax.set_xticks(list(x))
    ax.set_xticklabels([str(h) for h in hops])
    ax.set_xlabel("gold hop count")
    ax.set_ylabel("score")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Retrieval quality by hop count (n={report.count})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(rows: Sequence[dict], path: str | Path) -> None:
    """EM and F1 as a function of beam size."""
    plt = _pyplot()
    sizes = [r["beam_size"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sizes, [r["em"] for r in rows], marker="o", label="EM")
    ax.plot(sizes, [r["f1"] for r in rows], marker="s", label="F1")
    ax.set_xticks(sizes)
    ax.set_xlabel("beam size")
    ax.set_ylabel("score")
    ax.set_title("Retrieval quality vs beam size")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
