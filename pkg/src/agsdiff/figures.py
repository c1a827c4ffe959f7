"""Chart rendering for benchmark results.

Writes PNG files next to the CSV/JSON output so a run leaves a complete,
self-describing result directory behind.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

from .bench import BenchResult


def render_report_figure(reports, path: Path) -> Path:
    """Bar chart of difference volume per checkpoint step."""
    labels = []
    deleted = []
    created = []
    changes = []
    for report in reports:
        labels.append(f"{report.test_id}\n{report.step_name}")
        deleted.append(len(report.deleted))
        created.append(len(report.created))
        changes.append(sum(len(p.changes) for p in report.attribute_diffs))

    positions = range(len(labels))
    width = 0.28
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(labels)), 4))
    ax.bar([p - width for p in positions], deleted, width, label="deleted")
    ax.bar(list(positions), created, width, label="created")
    ax.bar([p + width for p in positions], changes, width, label="attribute changes")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("count")
    ax.set_title("Differences per checkpoint")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_figures(result: BenchResult, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        _accuracy_figure(result, out_dir / "bench_accuracy.png"),
        _duration_figure(result, out_dir / "bench_durations.png"),
        _reported_figure(result, out_dir / "bench_reported.png"),
    ]
    return written


def _strategies(result: BenchResult) -> list[str]:
    return list(result.aggregates.keys())


def _accuracy_figure(result: BenchResult, path: Path) -> Path:
    strategies = _strategies(result)
    precision = [result.aggregates[s]["precision"] or 0.0 for s in strategies]
    recall = [result.aggregates[s]["recall"] or 0.0 for s in strategies]
    positions = range(len(strategies))
    width = 0.38

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([p - width / 2 for p in positions], precision, width, label="precision")
    ax.bar([p + width / 2 for p in positions], recall, width, label="recall")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(strategies)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("micro-averaged score")
    ax.set_title("Mutation attribution accuracy by strategy")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _duration_figure(result: BenchResult, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for strategy in _strategies(result):
        rows = sorted(
            (r for r in result.rows if r.strategy == strategy),
            key=lambda r: r.size,
        )
        ax.plot(
            [r.size for r in rows],
            [r.ms for r in rows],
            marker="o",
            linestyle="-",
            markersize=3,
            linewidth=1,
            label=strategy,
        )
    ax.set_xlabel("page size (nodes)")
    ax.set_ylabel("comparison time (ms)")
    ax.set_yscale("log")
    ax.set_title("Comparison time by page size")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _reported_figure(result: BenchResult, path: Path) -> Path:
    strategies = _strategies(result)
    deleted = [result.aggregates[s]["deleted"] for s in strategies]
    created = [result.aggregates[s]["created"] for s in strategies]
    changes = [result.aggregates[s]["maintained_changes"] for s in strategies]
    positions = range(len(strategies))

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(positions, deleted, label="deleted")
    ax.bar(positions, created, bottom=deleted, label="created")
    bottoms = [d + c for d, c in zip(deleted, created)]
    ax.bar(positions, changes, bottom=bottoms, label="attribute changes")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(strategies)
    ax.set_ylabel("reported differences (total)")
    ax.set_title("Report volume by strategy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
