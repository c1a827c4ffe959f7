"""Mutation benchmark for the element identification strategies.

Generates synthetic page snapshots, plants one mutation per change
category, runs the comparison engine, and scores how many reported
differences point at the planted changes.  Results go to a CSV file,
a JSON aggregate, and (via :mod:`agsdiff.figures`) chart images.
"""

from __future__ import annotations

import csv
import enum
import json
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import UnknownTarget
from .executor import DiffReport, Strategy, execute
from .filters import EMPTY_RULES, GEOMETRY_KEYS
from .identification import DEFAULT_CONFIG, KeyConfig
from .snapshot import SnapshotNode, construct_ags, parent_path, split_path


class Category(enum.Enum):
    """Taxonomy of planted changes, grouped by how they surface on a page."""

    TEXT = "1.1 text-content"
    FONT = "1.2 font"
    FONT_COLOR = "1.3 font-color"
    TRANSLATION = "2.1 translation"
    SIZE = "2.2 size-change"
    DELETE = "3.1 delete"
    CREATE = "3.2 create"
    TYPE_CHANGE = "3.3 type-change"


# Categories whose mutation moves, resizes, adds, or removes boxes and can
# therefore knock the geometry of nearby elements without being "wrong".
_LAYOUT_CATEGORIES = frozenset(
    {
        Category.TRANSLATION,
        Category.SIZE,
        Category.DELETE,
        Category.CREATE,
        Category.TYPE_CHANGE,
    }
)


@dataclass(frozen=True)
class Mutation:
    """One planted change.

    ``params`` carries everything scoring needs (changed values, affected
    subtree paths, the inserted node's path) so that attribution never has
    to re-derive state from the page itself.
    """

    category: Category
    target: str
    params: tuple[tuple[str, object], ...] = ()

    def param(self, key: str, default: object = None) -> object:
        for name, value in self.params:
            if name == key:
                return value
        return default


@dataclass(frozen=True)
class BenchScore:
    tp: int
    fn: int
    fp: int
    durations_ms: tuple[float, ...] = ()

    @property
    def precision(self) -> float | None:
        total = self.tp + self.fp
        return self.tp / total if total else None

    @property
    def recall(self) -> float | None:
        total = self.tp + self.fn
        return self.tp / total if total else None


@dataclass(frozen=True)
class BenchRow:
    page: int
    size: int
    strategy: str
    rep: int
    ms: float
    tp: int
    fn: int
    fp: int
    deleted: int
    created: int
    maintained_changes: int

    @property
    def precision(self) -> float | None:
        total = self.tp + self.fp
        return self.tp / total if total else None

    @property
    def recall(self) -> float | None:
        total = self.tp + self.fn
        return self.tp / total if total else None


@dataclass(frozen=True)
class BenchConfig:
    pages: int = 20
    min_size: int = 200
    max_size: int = 2000
    strategies: tuple[Strategy, ...] = tuple(Strategy)
    repetitions: int = 1
    seed: int = 0
    keys: KeyConfig = DEFAULT_CONFIG


@dataclass(frozen=True)
class BenchResult:
    rows: tuple[BenchRow, ...]
    aggregates: Mapping[str, Mapping[str, object]]


CSV_COLUMNS = ("page", "strategy", "rep", "ms", "tp", "fn", "fp", "precision", "recall")

_CONTAINER_TAGS = ("div", "div", "section", "ul", "nav", "article", "form")
_LEAF_TAGS = ("p", "span", "a", "button", "h2", "li", "label", "input")
_WORDS = (
    "account", "basket", "checkout", "details", "invoice", "login", "menu",
    "offers", "orders", "profile", "search", "settings", "shop", "support",
)
_CLASS_NAMES = (
    "card", "row", "col", "hero", "muted", "primary", "wide", "compact",
    "active", "badge",
)
_TEXT_COLORS = (
    "#111111", "#2c3e50", "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#b9770e",
)
_BACKGROUNDS = ("#ffffff", "#f8f9fa", "#eef2f7", "#fff3cd", "#e2e3e5")
_FONT_STACKS = (
    "Arial, sans-serif",
    "Georgia, serif",
    "Verdana, sans-serif",
    "Tahoma, sans-serif",
    "'Courier New', monospace",
)

_MAX_CHILDREN = 6
_MAX_DEPTH = 7
_PAD = 8


def generate_page(seed: int, size: int) -> list[SnapshotNode]:
    """Deterministic synthetic snapshot with ``size`` nodes in document order."""
    if size < 1:
        raise ValueError("size must be at least 1")
    rng = random.Random(f"page-{seed}")

    children: list[list[int]] = [[] for _ in range(size)]
    depths = [0] * size
    open_slots = [0]
    for node in range(1, size):
        if not open_slots:
            open_slots.append(0)
        pick = rng.randrange(len(open_slots))
        parent = open_slots[pick]
        children[parent].append(node)
        depths[node] = depths[parent] + 1
        if depths[node] < _MAX_DEPTH:
            open_slots.append(node)
        if len(children[parent]) >= _MAX_CHILDREN:
            open_slots.pop(pick)

    out: list[SnapshotNode] = []

    def emit(node: int, prefix: str, tag_counts: dict[str, int], x: int, y: int, width: int) -> int:
        is_leaf = not children[node]
        if node == 0:
            tag = "html"
        elif is_leaf:
            tag = rng.choice(_LEAF_TAGS)
        else:
            tag = rng.choice(_CONTAINER_TAGS)
        tag_counts[tag] = tag_counts.get(tag, 0) + 1
        path = f"{prefix}/{tag}[{tag_counts[tag]}]"

        html: dict[str, str] = {}
        css: dict[str, str] = {}
        if node == 0:
            html["lang"] = "en"
        if rng.random() < 0.30:
            html["id"] = f"{rng.choice(_WORDS)}-{node}"
        if rng.random() < 0.55:
            html["class"] = " ".join(
                sorted(rng.sample(_CLASS_NAMES, rng.randint(1, 2)))
            )

        if is_leaf:
            text = None
            if rng.random() < 0.90:
                text = " ".join(rng.choice(_WORDS) for _ in range(rng.randint(1, 3)))
            if rng.random() < 0.70:
                css["color"] = rng.choice(_TEXT_COLORS)
            if rng.random() < 0.60:
                css["font-family"] = rng.choice(_FONT_STACKS)
            if rng.random() < 0.50:
                css["font-size"] = f"{rng.choice((12, 14, 16, 18, 24))}px"
            height = rng.randint(9, 32) * 2
            out.append(SnapshotNode(path, html, css, x, y, max(40, width), height, text))
            return height

        if rng.random() < 0.35:
            css["background-color"] = rng.choice(_BACKGROUNDS)
        slot = len(out)
        out.append(SnapshotNode(path, {}, {}, 0, 0, 0, 0))
        cursor = y + _PAD
        counts: dict[str, int] = {}
        for child in children[node]:
            cursor += emit(child, path, counts, x + _PAD, cursor, width - 2 * _PAD) + _PAD
        height = max(30, cursor - y)
        out[slot] = SnapshotNode(path, html, css, x, y, max(40, width), height)
        return height

    emit(0, "", {}, 0, 0, 1200)
    return out


def _subtree_paths(paths: Sequence[str], root: str) -> tuple[str, ...]:
    prefix = root + "/"
    return tuple(p for p in paths if p == root or p.startswith(prefix))


def plan_mutations(
    nodes: Sequence[SnapshotNode],
    seed: int,
    categories: Sequence[Category] = tuple(Category),
) -> list[Mutation]:
    """Pick one target per category; all targeted subtrees are disjoint."""
    rng = random.Random(f"plan-{seed}")
    paths = [n.path for n in nodes]
    has_children = {parent_path(p) for p in paths if parent_path(p) is not None}
    claimed: list[str] = []

    def conflicts(path: str) -> bool:
        return any(
            path == c or path.startswith(c + "/") or c.startswith(path + "/")
            for c in claimed
        )

    def pick(pool: list[SnapshotNode], category: Category) -> SnapshotNode:
        pool = [n for n in pool if not conflicts(n.path)]
        if not pool:
            raise UnknownTarget(f"no eligible target for {category.value}")
        return pool[rng.randrange(len(pool))]

    leaves = [n for n in nodes if n.path not in has_children]
    subtree_cap = max(3, len(nodes) // 6)
    mutations: list[Mutation] = []

    for category in categories:
        if category is Category.TEXT:
            node = pick([n for n in nodes if n.text], category)
            new = f"updated {rng.choice(_WORDS)} copy"
            while new == node.text:
                new = f"updated {rng.choice(_WORDS)} copy"
            mutations.append(Mutation(category, node.path, (("old", node.text), ("new", new))))
            claimed.append(node.path)
        elif category is Category.FONT:
            node = pick([n for n in nodes if "font-family" in n.css_attributes], category)
            old = node.css_attributes["font-family"]
            new = rng.choice([f for f in _FONT_STACKS if f != old])
            mutations.append(Mutation(category, node.path, (("old", old), ("new", new))))
            claimed.append(node.path)
        elif category is Category.FONT_COLOR:
            node = pick([n for n in nodes if "color" in n.css_attributes], category)
            old = node.css_attributes["color"]
            new = rng.choice([c for c in _TEXT_COLORS if c != old])
            mutations.append(Mutation(category, node.path, (("old", old), ("new", new))))
            claimed.append(node.path)
        elif category is Category.TRANSLATION:
            pool = [
                n
                for n in nodes
                if n.path in has_children
                and parent_path(n.path) is not None
                and len(_subtree_paths(paths, n.path)) <= subtree_cap
            ]
            node = pick(pool, category)
            axis = rng.choice(("x", "y"))
            delta = rng.choice((1, -1)) * rng.randint(15, 60)
            mutations.append(
                Mutation(
                    category,
                    node.path,
                    (("axis", axis), ("delta", delta), ("subtree", _subtree_paths(paths, node.path))),
                )
            )
            claimed.append(node.path)
        elif category is Category.SIZE:
            node = pick(list(nodes), category)
            axis = rng.choice(("width", "height"))
            delta = rng.randint(5, 40)
            mutations.append(Mutation(category, node.path, (("axis", axis), ("delta", delta))))
            claimed.append(node.path)
        elif category is Category.DELETE:
            pool = [
                n
                for n in nodes
                if parent_path(n.path) is not None
                and len(_subtree_paths(paths, n.path)) <= subtree_cap
            ]
            node = pick(pool, category)
            mutations.append(
                Mutation(category, node.path, (("subtree", _subtree_paths(paths, node.path)),))
            )
            claimed.append(node.path)
        elif category is Category.CREATE:
            pool = [
                n
                for n in nodes
                if n.path in has_children and len(split_path(n.path)) < _MAX_DEPTH
            ]
            parent = pick(pool, category)
            tag = rng.choice(_LEAF_TAGS)
            used = [
                split_path(p)[-1][1]
                for p in paths
                if parent_path(p) == parent.path and split_path(p)[-1][0] == tag
            ]
            new_path = f"{parent.path}/{tag}[{max(used, default=0) + 1}]"
            # Odd x/width and a 71..89 height keep the insert geometrically
            # distinct from every generated node, so nothing pairs with it.
            spec = SnapshotNode(
                path=new_path,
                html_attributes={"id": f"inserted-{rng.randrange(10_000)}"},
                css_attributes={},
                x=parent.x + _PAD + 1,
                y=parent.y + parent.height,
                width=max(41, parent.width - 17),
                height=rng.randint(35, 44) * 2 + 1,
                text="inserted element",
            )
            mutations.append(Mutation(category, parent.path, (("path", new_path), ("node", spec))))
            claimed.append(new_path)
        elif category is Category.TYPE_CHANGE:
            pool = [
                n
                for n in leaves
                if parent_path(n.path) is not None and not conflicts(n.path)
            ]
            if not pool:
                raise UnknownTarget(f"no eligible target for {category.value}")
            start = rng.randrange(len(pool))
            planned = None
            for offset in range(len(pool)):
                node = pool[(start + offset) % len(pool)]
                old_tag = split_path(node.path)[-1][0]
                new_tag = rng.choice([t for t in _LEAF_TAGS if t != old_tag])
                parent = parent_path(node.path)
                used = [
                    split_path(p)[-1][1]
                    for p in paths
                    if parent_path(p) == parent and split_path(p)[-1][0] == new_tag
                ]
                new_path = f"{parent}/{new_tag}[{max(used, default=0) + 1}]"
                if not conflicts(new_path):
                    planned = (node.path, new_path)
                    break
            if planned is None:
                raise UnknownTarget(f"no eligible target for {category.value}")
            mutations.append(Mutation(category, planned[0], (("new_path", planned[1]),)))
            claimed.extend(planned)
        else:  # pragma: no cover - exhaustive over Category
            raise UnknownTarget(f"unsupported category {category!r}")
    return mutations


def apply_mutation(nodes: Sequence[SnapshotNode], mutation: Mutation) -> list[SnapshotNode]:
    by_path = {n.path: n for n in nodes}
    if mutation.category is not Category.CREATE and mutation.target not in by_path:
        raise UnknownTarget(f"no node at {mutation.target}")
    category = mutation.category
    out: list[SnapshotNode] = []

    if category is Category.CREATE:
        if mutation.target not in by_path:
            raise UnknownTarget(f"no node at {mutation.target}")
        spec = mutation.param("node")
        if not isinstance(spec, SnapshotNode):
            raise UnknownTarget("create mutation carries no node")
        inserted = False
        for node in nodes:
            out.append(node)
            if node.path == mutation.target:
                out.append(spec)
                inserted = True
        if not inserted:  # pragma: no cover - guarded above
            raise UnknownTarget(f"no node at {mutation.target}")
        return out

    if category is Category.DELETE:
        doomed = set(mutation.param("subtree", ()))
        doomed.add(mutation.target)
        prefix = mutation.target + "/"
        return [n for n in nodes if n.path not in doomed and not n.path.startswith(prefix)]

    for node in nodes:
        if category is Category.TEXT and node.path == mutation.target:
            node = _replace(node, text=mutation.param("new"))
        elif category is Category.FONT and node.path == mutation.target:
            css = dict(node.css_attributes)
            css["font-family"] = mutation.param("new")
            node = _replace(node, css_attributes=css)
        elif category is Category.FONT_COLOR and node.path == mutation.target:
            css = dict(node.css_attributes)
            css["color"] = mutation.param("new")
            node = _replace(node, css_attributes=css)
        elif category is Category.TRANSLATION and node.path in mutation.param("subtree", ()):
            axis = mutation.param("axis")
            delta = int(mutation.param("delta", 0))
            node = _replace(node, **{axis: getattr(node, axis) + delta})
        elif category is Category.SIZE and node.path == mutation.target:
            axis = mutation.param("axis")
            delta = int(mutation.param("delta", 0))
            node = _replace(node, **{axis: getattr(node, axis) + delta})
        elif category is Category.TYPE_CHANGE and node.path == mutation.target:
            node = _replace(node, path=str(mutation.param("new_path")))
        out.append(node)
    return out


def apply_mutations(nodes: Sequence[SnapshotNode], mutations: Iterable[Mutation]) -> list[SnapshotNode]:
    current = list(nodes)
    for mutation in mutations:
        current = apply_mutation(current, mutation)
    return current


def _replace(node: SnapshotNode, **changes: object) -> SnapshotNode:
    values = {
        "path": node.path,
        "html_attributes": node.html_attributes,
        "css_attributes": node.css_attributes,
        "x": node.x,
        "y": node.y,
        "width": node.width,
        "height": node.height,
        "text": node.text,
    }
    values.update(changes)
    return SnapshotNode(**values)  # type: ignore[arg-type]


_DELETED = "deleted"
_CREATED = "created"
_CHANGE = "change"


def _report_entries(report: DiffReport) -> list[tuple[str, str, str | None, str | None]]:
    entries: list[tuple[str, str, str | None, str | None]] = []
    for summary in report.deleted:
        entries.append((_DELETED, summary.handle, None, None))
    for summary in report.created:
        entries.append((_CREATED, summary.handle, None, None))
    for pair in report.attribute_diffs:
        for change in pair.changes:
            entries.append((_CHANGE, pair.handle, pair.actual_handle, change.key))
    return entries


def _attributes_to(entry: tuple[str, str, str | None, str | None], mutation: Mutation) -> bool:
    kind, handle, actual_handle, key = entry
    category = mutation.category
    if category is Category.TEXT:
        return kind == _CHANGE and key == "text" and handle == mutation.target
    if category is Category.FONT:
        return kind == _CHANGE and key == "font-family" and handle == mutation.target
    if category is Category.FONT_COLOR:
        return kind == _CHANGE and key == "color" and handle == mutation.target
    if category is Category.TRANSLATION:
        return (
            kind == _CHANGE
            and key == mutation.param("axis")
            and handle in mutation.param("subtree", ())
        )
    if category is Category.SIZE:
        return kind == _CHANGE and key == mutation.param("axis") and handle == mutation.target
    if category is Category.DELETE:
        return kind == _DELETED and handle in mutation.param("subtree", ())
    if category is Category.CREATE:
        return kind == _CREATED and handle == mutation.param("path")
    if category is Category.TYPE_CHANGE:
        new_path = mutation.param("new_path")
        if kind == _CHANGE:
            return key in ("type", "path") and (
                handle == mutation.target or actual_handle == new_path
            )
        if kind == _DELETED:
            return handle == mutation.target
        return handle == new_path
    return False  # pragma: no cover - exhaustive over Category


def _anchor_path(mutation: Mutation) -> str:
    if mutation.category is Category.CREATE:
        return str(mutation.param("path"))
    return mutation.target


def _is_layout_cascade(
    entry: tuple[str, str, str | None, str | None], mutations: Sequence[Mutation]
) -> bool:
    kind, handle, _actual, key = entry
    if kind != _CHANGE or key not in GEOMETRY_KEYS:
        return False
    for mutation in mutations:
        if mutation.category not in _LAYOUT_CATEGORIES:
            continue
        anchor = _anchor_path(mutation)
        if handle.startswith(anchor + "/"):
            return True
        if handle != anchor and parent_path(handle) == parent_path(anchor):
            return True
    return False


def score_run(introduced: Sequence[Mutation], report: DiffReport) -> BenchScore:
    """Count planted changes found (tp), missed (fn), and spurious diffs (fp).

    Geometry knock-on diffs caused by a layout-affecting mutation nearby
    are excluded from fp; they are a consequence, not a false report.
    """
    entries = _report_entries(report)
    attributed = [False] * len(entries)
    tp = 0
    fn = 0
    for mutation in introduced:
        hit = False
        for idx, entry in enumerate(entries):
            if _attributes_to(entry, mutation):
                attributed[idx] = True
                hit = True
        if hit:
            tp += 1
        else:
            fn += 1
    fp = sum(
        1
        for idx, entry in enumerate(entries)
        if not attributed[idx] and not _is_layout_cascade(entry, introduced)
    )
    return BenchScore(tp=tp, fn=fn, fp=fp, durations_ms=(report.metrics.duration_ms,))


def _page_sizes(config: BenchConfig) -> list[int]:
    if config.pages == 1:
        return [config.min_size]
    span = config.max_size - config.min_size
    return [
        config.min_size + round(span * i / (config.pages - 1))
        for i in range(config.pages)
    ]


def iter_pages(config: BenchConfig) -> Iterator[tuple[int, list[SnapshotNode], list[Mutation]]]:
    for page, size in enumerate(_page_sizes(config)):
        page_seed = config.seed * 100_003 + page
        nodes = generate_page(page_seed, size)
        mutations = plan_mutations(nodes, page_seed)
        yield page, nodes, mutations


def run_benchmark(config: BenchConfig = BenchConfig()) -> BenchResult:
    rows: list[BenchRow] = []
    for page, nodes, mutations in iter_pages(config):
        expected = construct_ags(nodes)
        actual = construct_ags(apply_mutations(nodes, mutations))
        for strategy in config.strategies:
            for rep in range(config.repetitions):
                start = time.perf_counter()
                report = execute(
                    expected,
                    actual,
                    rules=EMPTY_RULES,
                    strategy=strategy,
                    config=config.keys,
                    test_id=f"page-{page}",
                    step_name="bench",
                )
                elapsed_ms = (time.perf_counter() - start) * 1000.0
                score = score_run(mutations, report)
                maintained_changes = sum(len(p.changes) for p in report.attribute_diffs)
                rows.append(
                    BenchRow(
                        page=page,
                        size=len(nodes),
                        strategy=strategy.value,
                        rep=rep,
                        ms=elapsed_ms,
                        tp=score.tp,
                        fn=score.fn,
                        fp=score.fp,
                        deleted=len(report.deleted),
                        created=len(report.created),
                        maintained_changes=maintained_changes,
                    )
                )
    counters = ("tp", "fn", "fp", "deleted", "created", "maintained_changes")
    totals: dict[str, dict[str, int]] = {}
    durations: dict[str, list[float]] = {}
    for row in rows:
        bucket = totals.setdefault(row.strategy, {name: 0 for name in (*counters, "runs")})
        for name in counters:
            bucket[name] += getattr(row, name)
        bucket["runs"] += 1
        durations.setdefault(row.strategy, []).append(row.ms)

    aggregates: dict[str, dict[str, object]] = {}
    for strategy, bucket in totals.items():
        tp, fn, fp = bucket["tp"], bucket["fn"], bucket["fp"]
        times = durations[strategy]
        aggregates[strategy] = {
            **bucket,
            "precision": tp / (tp + fp) if tp + fp else None,
            "recall": tp / (tp + fn) if tp + fn else None,
            "reported_total": bucket["deleted"]
            + bucket["created"]
            + bucket["maintained_changes"],
            "ms_min": min(times),
            "ms_avg": sum(times) / len(times),
            "ms_max": max(times),
        }
    return BenchResult(rows=tuple(rows), aggregates=aggregates)


def _csv_value(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(result: BenchResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow(
                [
                    row.page,
                    row.strategy,
                    row.rep,
                    f"{row.ms:.3f}",
                    row.tp,
                    row.fn,
                    row.fp,
                    _csv_value(row.precision),
                    _csv_value(row.recall),
                ]
            )


def write_json(result: BenchResult, path: Path) -> None:
    doc = {
        "aggregates": {k: dict(v) for k, v in result.aggregates.items()},
        "rows": [
            {
                "page": row.page,
                "size": row.size,
                "strategy": row.strategy,
                "rep": row.rep,
                "ms": round(row.ms, 3),
                "tp": row.tp,
                "fn": row.fn,
                "fp": row.fp,
                "precision": row.precision,
                "recall": row.recall,
                "deleted": row.deleted,
                "created": row.created,
                "maintained_changes": row.maintained_changes,
            }
            for row in result.rows
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_outputs(result: BenchResult, out_dir: Path) -> list[Path]:
    """Write bench.csv, bench.json, and chart PNGs under ``out_dir``."""
    from . import figures

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "bench.csv"
    json_path = out_dir / "bench.json"
    write_csv(result, csv_path)
    write_json(result, json_path)
    written = [csv_path, json_path]
    written.extend(figures.render_figures(result, out_dir))
    return written
