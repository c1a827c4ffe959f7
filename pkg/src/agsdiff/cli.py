"""Command-line interface.

Exit codes are uniform across verbs:

* 0: no differences (or action completed)
* 1: differences reported
* 2: golden master created on first run
* 3: any error (bad usage, unreadable input, suite problems)
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import click

from . import ags
from .bench import BenchConfig, run_benchmark, write_outputs
from .errors import AgsDiffError
from .executor import DiffReport, Status, Strategy, execute, save_report
from .filters import EMPTY_RULES, load_rules
from .identification import DEFAULT_CONFIG, KeyConfig
from .maintenance import (
    Action,
    Scope,
    apply_decision,
    group_changes,
    make_decision,
)
from .snapshot import SNAPSHOT_SUFFIX, load_snapshot_state
from .store import Suite

_STATUS_EXIT = {
    Status.OK: 0,
    Status.DIFFERENCES: 1,
    Status.GOLDEN_MASTER_CREATED: 2,
}

_suite_option = click.option(
    "--suite",
    "suite_dir",
    envvar="AGSDIFF_SUITE",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
    help="Suite directory (env: AGSDIFF_SUITE).",
)

_strategy_option = click.option(
    "--strategy",
    type=click.Choice([s.value for s in Strategy]),
    default=None,
    help="Identification strategy override.",
)

_t_option = click.option(
    "--t", "t", type=click.FloatRange(0.0, 1.0), default=None,
    help="String similarity threshold override.",
)

_u_option = click.option(
    "--u", "u", type=click.FloatRange(0.0, 1.0), default=None,
    help="Match score threshold override.",
)


def _load_state(path: Path) -> ags.GuiState:
    if path.name.endswith(SNAPSHOT_SUFFIX):
        return load_snapshot_state(path)
    return ags.load_state(path)


def _override_keys(base: KeyConfig, t: float | None, u: float | None) -> KeyConfig:
    if t is None and u is None:
        return base
    return KeyConfig(
        strong_keys=base.strong_keys,
        weak_keys=base.weak_keys,
        matching_extra_keys=base.matching_extra_keys,
        t=base.t if t is None else t,
        u=base.u if u is None else u,
    )


def _describe(report: DiffReport) -> str:
    if report.status is Status.GOLDEN_MASTER_CREATED:
        return (
            f"{report.test_id}/{report.step_name}: golden master created "
            f"({report.metrics.expected_elements} elements)"
        )
    if report.status is Status.OK:
        return f"{report.test_id}/{report.step_name}: ok ({report.metrics.maintained} elements)"
    changes = sum(len(p.changes) for p in report.attribute_diffs)
    return (
        f"{report.test_id}/{report.step_name}: differences "
        f"(deleted {len(report.deleted)}, created {len(report.created)}, "
        f"attribute changes {changes})"
    )


def _render_report(report: DiffReport) -> str:
    lines = [_describe(report)]
    for summary in report.deleted:
        lines.append(f"  deleted  {summary.handle}")
    for summary in report.created:
        lines.append(f"  created  {summary.handle}")
    for pair in report.attribute_diffs:
        label = pair.handle
        if pair.actual_handle != pair.handle:
            label = f"{pair.handle} -> {pair.actual_handle}"
        lines.append(f"  changed  {label}")
        for change in pair.changes:
            lines.append(
                f"    {change.key}: {_fmt(change.expected)} -> {_fmt(change.actual)}"
            )
    return "\n".join(lines)


def _fmt(value: str | None) -> str:
    return "(absent)" if value is None else repr(value)


@click.group()
@click.version_option(package_name="agsdiff", message="%(prog)s %(version)s")
def cli() -> None:
    """Golden-master GUI regression checks over attribute trees."""


@cli.command("check")
@click.argument("snapshot", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_suite_option
@click.option("--test", "test_id", required=True, help="Test identifier.")
@click.option("--step", "step_name", required=True, help="Checkpoint step name.")
@_strategy_option
@_t_option
@_u_option
def cmd_check(
    snapshot: Path,
    suite_dir: Path,
    test_id: str,
    step_name: str,
    strategy: str | None,
    t: float | None,
    u: float | None,
) -> int:
    """Compare SNAPSHOT against the suite golden master for --test/--step.

    Creates the golden master on first run (exit 2). Writes the captured
    state and a JSON report next to the golden master.
    """
    suite = Suite(suite_dir)
    state = _load_state(snapshot)
    keys = _override_keys(suite.config().keys, t, u)
    report = suite.checkpoint(
        test_id,
        step_name,
        state,
        strategy=Strategy(strategy) if strategy else None,
        keys=keys if (t is not None or u is not None) else None,
    )
    if report.status is not Status.GOLDEN_MASTER_CREATED:
        suite.write_actual(test_id, step_name, ags.canonicalize(state))
    suite.write_report(report)
    click.echo(_render_report(report))
    return _STATUS_EXIT[report.status]


@cli.command("diff")
@click.argument("expected", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("actual", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--rules",
    "rules_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Filter rule file applied to both sides.",
)
@_strategy_option
@_t_option
@_u_option
@click.option(
    "--out",
    "out_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the JSON report to this file.",
)
def cmd_diff(
    expected: Path,
    actual: Path,
    rules_path: Path | None,
    strategy: str | None,
    t: float | None,
    u: float | None,
    out_path: Path | None,
) -> int:
    """Compare two state files (.ags.json or .snap.json) directly."""
    rules = load_rules(rules_path) if rules_path else EMPTY_RULES
    report = execute(
        _load_state(expected),
        _load_state(actual),
        rules=rules,
        strategy=Strategy(strategy) if strategy else Strategy.MATCHING,
        config=_override_keys(DEFAULT_CONFIG, t, u),
        test_id=expected.name,
        step_name=actual.name,
    )
    if out_path is not None:
        save_report(out_path, report)
    click.echo(_render_report(report))
    return _STATUS_EXIT[report.status]


def _collect_reports(suite: Suite, report_path: Path | None) -> list[DiffReport]:
    from .executor import load_report

    if report_path is not None:
        return [load_report(report_path)]
    return list(suite.iter_reports())


def _indexed_groups(suite: Suite, reports):
    strong = suite.config().keys.strong_keys
    return list(group_changes(reports, strong_keys=strong).items())


@cli.command("accept")
@_suite_option
@click.option(
    "--report",
    "report_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Act on one report file instead of every stored report.",
)
@click.option("--group", "group_index", type=int, default=None, help="Group index to accept.")
@click.option("--all", "accept_all", is_flag=True, help="Accept every pending group.")
@click.option(
    "--propagate/--single",
    default=False,
    help="Apply to every occurrence of the change, or just the first.",
)
def cmd_accept(
    suite_dir: Path,
    report_path: Path | None,
    group_index: int | None,
    accept_all: bool,
    propagate: bool,
) -> int:
    """Accept grouped attribute changes into the golden masters."""
    if (group_index is None) == (not accept_all):
        raise click.UsageError("pass exactly one of --group or --all")
    suite = Suite(suite_dir, create=False)
    groups = _indexed_groups(suite, _collect_reports(suite, report_path))
    if not groups:
        click.echo("no pending changes")
        return 0
    if accept_all:
        # Accepting a path change renames the element, which would strand
        # the stale handles of this run's remaining groups; apply path last.
        chosen = sorted(groups, key=lambda item: item[0].key == "path")
        scope = Scope.PROPAGATE
    else:
        if not 0 <= group_index < len(groups):
            raise click.UsageError(f"--group must be in 0..{len(groups) - 1}")
        chosen = [groups[group_index]]
        scope = Scope.PROPAGATE if propagate else Scope.SINGLE
    failures = 0
    for signature, occurrences in chosen:
        summary = apply_decision(suite, make_decision(signature, Action.ACCEPT, scope), occurrences)
        failures += summary.error_count
        for status in summary.statuses:
            click.echo(
                f"accept {signature.key} at {status.occurrence.test_id}/"
                f"{status.occurrence.step_name} {status.occurrence.handle}: {status.status}"
            )
    return 3 if failures else 0


@cli.command("ignore")
@_suite_option
@click.argument("rule", required=False)
@click.option(
    "--report",
    "report_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Act on one report file instead of every stored report.",
)
@click.option("--group", "group_index", type=int, default=None, help="Group index to ignore.")
@click.option(
    "--propagate/--single",
    default=False,
    help="Ignore the attribute everywhere, or only on this element.",
)
def cmd_ignore(
    suite_dir: Path,
    rule: str | None,
    report_path: Path | None,
    group_index: int | None,
    propagate: bool,
) -> int:
    """Append an ignore rule, either verbatim or derived from a change group."""
    suite = Suite(suite_dir, create=False)
    if (rule is None) == (group_index is None):
        raise click.UsageError("pass either a RULE line or --group")
    if rule is not None:
        from .filters import parse_rules

        parsed = parse_rules(rule)
        for item in parsed.rules:
            suite.append_rule(item)
            click.echo(f"added rule: {item.to_line()}")
        return 0
    groups = _indexed_groups(suite, _collect_reports(suite, report_path))
    if not 0 <= group_index < len(groups):
        raise click.UsageError(f"--group must be in 0..{len(groups) - 1}")
    signature, occurrences = groups[group_index]
    scope = Scope.PROPAGATE if propagate else Scope.SINGLE
    summary = apply_decision(suite, make_decision(signature, Action.IGNORE, scope), occurrences)
    for added in summary.rules_added:
        click.echo(f"added rule: {added}")
    return 0


@cli.command("report")
@_suite_option
@click.option("--test", "test_id", default=None, help="Limit to one test identifier.")
@click.option("--step", "step_name", default=None, help="Limit to one step name.")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Write report.csv and report_counts.png to this directory.",
)
def cmd_report(
    suite_dir: Path,
    test_id: str | None,
    step_name: str | None,
    out_dir: Path | None,
) -> int:
    """Render stored reports as text, with optional CSV and chart output."""
    suite = Suite(suite_dir, create=False)
    reports = [
        r
        for r in suite.iter_reports()
        if (test_id is None or r.test_id == test_id)
        and (step_name is None or r.step_name == step_name)
    ]
    if not reports:
        click.echo("no stored reports")
        return 0
    groups = _indexed_groups(suite, reports)
    for report in reports:
        click.echo(_render_report(report))
    if groups:
        click.echo("change groups:")
        for index, (signature, occurrences) in enumerate(groups):
            identity = ", ".join(f"{k}={v}" for k, v in signature.identity)
            click.echo(
                f"  [{index}] {signature.key}: {_fmt(signature.expected)} -> "
                f"{_fmt(signature.actual)} ({identity}; {len(occurrences)} occurrence(s))"
            )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_report_csv(reports, out_dir / "report.csv")
        from .figures import render_report_figure

        render_report_figure(reports, out_dir / "report_counts.png")
        click.echo(f"wrote {out_dir / 'report.csv'} and {out_dir / 'report_counts.png'}")
    worst = max((_STATUS_EXIT[r.status] for r in reports), default=0)
    return 1 if worst == 1 else 0


def _write_report_csv(reports, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ("test", "step", "status", "kind", "handle", "actual_handle", "key", "expected", "actual")
        )
        for report in reports:
            base = (report.test_id, report.step_name, report.status.value)
            for summary in report.deleted:
                writer.writerow((*base, "deleted", summary.handle, "", "", "", ""))
            for summary in report.created:
                writer.writerow((*base, "created", summary.handle, "", "", "", ""))
            for pair in report.attribute_diffs:
                for change in pair.changes:
                    writer.writerow(
                        (
                            *base,
                            "change",
                            pair.handle,
                            pair.actual_handle,
                            change.key,
                            "" if change.expected is None else change.expected,
                            "" if change.actual is None else change.actual,
                        )
                    )


def _parse_sizes(value: str) -> tuple[int, int]:
    text = value.strip()
    if "-" in text[1:]:
        low, _, high = text.partition("-")
        return int(low), int(high)
    size = int(text)
    return size, size


@cli.command("bench")
@click.option("--pages", type=click.IntRange(min=1), default=20, show_default=True)
@click.option(
    "--sizes",
    default="200-2000",
    show_default=True,
    help="Page size, N or MIN-MAX spread across pages.",
)
@click.option(
    "--strategies",
    default=",".join(s.value for s in Strategy),
    show_default=True,
    help="Comma-separated strategy names.",
)
@click.option("--reps", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("bench-out"),
    show_default=True,
    help="Directory for bench.csv, bench.json, and charts.",
)
def cmd_bench(
    pages: int, sizes: str, strategies: str, reps: int, seed: int, out_dir: Path
) -> int:
    """Run the synthetic mutation benchmark and write CSV, JSON, and charts."""
    try:
        min_size, max_size = _parse_sizes(sizes)
        chosen = tuple(Strategy(name.strip()) for name in strategies.split(",") if name.strip())
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if not chosen:
        raise click.UsageError("--strategies must name at least one strategy")
    config = BenchConfig(
        pages=pages,
        min_size=min_size,
        max_size=max_size,
        strategies=chosen,
        repetitions=reps,
        seed=seed,
    )
    result = run_benchmark(config)
    written = write_outputs(result, out_dir)
    for strategy, agg in result.aggregates.items():
        precision = "n/a" if agg["precision"] is None else f"{agg['precision']:.3f}"
        recall = "n/a" if agg["recall"] is None else f"{agg['recall']:.3f}"
        click.echo(
            f"{strategy}: tp={agg['tp']} fn={agg['fn']} fp={agg['fp']} "
            f"precision={precision} recall={recall} "
            f"avg={agg['ms_avg']:.1f}ms max={agg['ms_max']:.1f}ms"
        )
    for path in written:
        click.echo(f"wrote {path}")
    return 0


@cli.command("serve")
@click.argument(
    "source",
    required=False,
    type=click.Path(exists=True, path_type=Path),
)
@click.option(
    "--suite",
    "suite_dir",
    envvar="AGSDIFF_SUITE",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Suite directory (env: AGSDIFF_SUITE); used when SOURCE is omitted.",
)
@click.option("--port", type=click.IntRange(1, 65535), default=8123, show_default=True)
@click.option(
    "--ui",
    "ui_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory with a built review UI to serve at /.",
)
def cmd_serve(source: Path | None, suite_dir: Path | None, port: int, ui_dir: Path | None) -> int:
    """Serve reports and the decision API for a suite directory or report file.

    Binds to loopback only; this is a local review tool.
    """
    import uvicorn

    from .api import create_app, resolve_ui_dir

    target = source or suite_dir
    if target is None:
        raise click.UsageError("pass a SOURCE path or --suite (env AGSDIFF_SUITE)")
    app = create_app(target, ui_dir=resolve_ui_dir(ui_dir))
    click.echo(f"serving {target} on http://127.0.0.1:{port}/")
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        result = cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 3
    except click.Abort:
        click.echo("aborted", err=True)
        return 3
    except AgsDiffError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
