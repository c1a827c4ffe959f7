"""Filesystem store for golden masters, reports, and review artifacts.

Layout of a suite directory:

    <suite>/
        config               identification settings (TOML)
        recheck.ignore       filter rules applied to every comparison
        decisions.jsonl      append-only review journal
        index.json           maps directory names back to test/step names
        .lock                advisory writer lock
        <test-dir>/
            <step>.ags.json          golden master (filtered state)
            <step>.actual.ags.json   last checked actual state
            <step>.report.json       last comparison report

Test ids and step names are sanitized into directory and file names; the
index records the originals, and two different names that sanitize to
the same entry are rejected.  Writes go through a temp file and rename,
so readers never observe a half-written golden master.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import os
import re
from pathlib import Path
from typing import Iterator

from . import ags
from .config import (
    CONFIG_FILE_NAME,
    DEFAULT_SUITE_CONFIG,
    SuiteConfig,
    default_config_text,
    load_config,
)
from .errors import (
    CorruptGoldenMaster,
    ParseError,
    StoreError,
    StoreIOError,
    SuiteLocked,
    UnknownElement,
    UnknownStep,
    WellFormednessViolation,
)
from .executor import REPORT_SUFFIX, DiffReport, execute, load_report, report_to_json
from .filters import (
    EMPTY_RULES,
    FilterRule,
    FilterRuleSet,
    apply_state_filter,
    parse_rules,
)
from .identification import KeyConfig, Strategy

RULES_FILE_NAME = "recheck.ignore"
JOURNAL_FILE_NAME = "decisions.jsonl"
INDEX_FILE_NAME = "index.json"
LOCK_FILE_NAME = ".lock"
ACTUAL_SUFFIX = ".actual" + ags.AGS_SUFFIX

_RESERVED_NAMES = {
    CONFIG_FILE_NAME,
    RULES_FILE_NAME,
    JOURNAL_FILE_NAME,
    INDEX_FILE_NAME,
    LOCK_FILE_NAME,
}
_UNSAFE_RE = re.compile(r"[^A-Za-z0-9._-]")


def sanitize_name(name: str) -> str:
    """Filesystem-safe rendering of a test id or step name."""
    if not name:
        raise StoreError("test ids and step names must be non-empty")
    safe = _UNSAFE_RE.sub("-", name)
    if safe.startswith("."):
        safe = "-" + safe.lstrip(".")
    return safe


class Suite:
    """A golden-master collection rooted at one directory.

    Not thread-safe; cross-process writers are serialized through the
    suite lock, which is reentrant within one Suite object.
    """

    def __init__(self, root, create: bool = True):
        self.root = Path(root)
        self._lock_depth = 0
        if create:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
                if not self.config_path.exists():
                    _atomic_write(self.config_path, default_config_text().encode())
                if not self.rules_path.exists():
                    _atomic_write(self.rules_path, b"")
            except OSError as exc:
                raise StoreIOError(f"cannot initialize suite at {self.root}: {exc}") from exc
        elif not self.root.is_dir():
            raise StoreIOError(f"suite directory {self.root} does not exist")

    # ---- paths ----

    @property
    def config_path(self) -> Path:
        return self.root / CONFIG_FILE_NAME

    @property
    def rules_path(self) -> Path:
        return self.root / RULES_FILE_NAME

    @property
    def journal_path(self) -> Path:
        return self.root / JOURNAL_FILE_NAME

    @property
    def index_path(self) -> Path:
        return self.root / INDEX_FILE_NAME

    @property
    def lock_path(self) -> Path:
        return self.root / LOCK_FILE_NAME

    def test_dir(self, test_id: str) -> Path:
        safe = sanitize_name(test_id)
        if safe in _RESERVED_NAMES:
            raise StoreError(f"test id {test_id!r} collides with a reserved suite file")
        return self.root / safe

    def golden_master_path(self, test_id: str, step_name: str) -> Path:
        return self.test_dir(test_id) / (sanitize_name(step_name) + ags.AGS_SUFFIX)

    def actual_path(self, test_id: str, step_name: str) -> Path:
        return self.test_dir(test_id) / (sanitize_name(step_name) + ACTUAL_SUFFIX)

    def report_path(self, test_id: str, step_name: str) -> Path:
        return self.test_dir(test_id) / (sanitize_name(step_name) + REPORT_SUFFIX)

    # ---- settings ----

    def rules(self) -> FilterRuleSet:
        if not self.rules_path.exists():
            return EMPTY_RULES
        try:
            text = self.rules_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreIOError(f"cannot read {self.rules_path}: {exc}") from exc
        return parse_rules(text)

    def config(self) -> SuiteConfig:
        if not self.config_path.exists():
            return DEFAULT_SUITE_CONFIG
        try:
            return load_config(self.config_path)
        except OSError as exc:
            raise StoreIOError(f"cannot read {self.config_path}: {exc}") from exc

    # ---- locking ----

    @contextlib.contextmanager
    def writer_lock(self, blocking: bool = True) -> Iterator[None]:
        """Exclusive suite-wide lock; raises SuiteLocked when contended
        and ``blocking`` is false."""
        if self._lock_depth:
            self._lock_depth += 1
            try:
                yield
            finally:
                self._lock_depth -= 1
            return
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_RDWR, 0o644)
        except OSError as exc:
            raise StoreIOError(f"cannot open lock file {self.lock_path}: {exc}") from exc
        try:
            try:
                fcntl.flock(fd, fcntl.LOCK_EX | (0 if blocking else fcntl.LOCK_NB))
            except OSError as exc:
                raise SuiteLocked(f"suite {self.root} is locked by another writer") from exc
            self._lock_depth = 1
            try:
                yield
            finally:
                self._lock_depth = 0
        finally:
            os.close(fd)

    # ---- index ----

    def _load_index(self) -> dict:
        if not self.index_path.exists():
            return {"tests": {}}
        try:
            with open(self.index_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise StoreIOError(f"cannot read {self.index_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise StoreError(f"corrupt suite index {self.index_path}: {exc}") from exc
        return doc

    def _register_step(self, test_id: str, step_name: str) -> None:
        index = self._load_index()
        tests = index.setdefault("tests", {})
        safe_test = self.test_dir(test_id).name
        safe_step = sanitize_name(step_name)
        entry = tests.setdefault(safe_test, {"id": test_id, "steps": {}})
        _check_entry(entry, test_id, step_name, safe_test, safe_step)
        if entry["steps"].get(safe_step) == step_name:
            return
        entry["steps"][safe_step] = step_name
        _atomic_write(self.index_path, json.dumps(index, indent=2).encode() + b"\n")

    def _check_names(self, test_id: str, step_name: str) -> bool:
        """Raise on a sanitization collision with recorded names; return
        whether this (test, step) pair is already registered."""
        safe_test = self.test_dir(test_id).name
        safe_step = sanitize_name(step_name)
        entry = self._load_index().get("tests", {}).get(safe_test)
        if entry is None:
            return False
        _check_entry(entry, test_id, step_name, safe_test, safe_step)
        return entry["steps"].get(safe_step) == step_name

    def _ensure_registered(self, test_id: str, step_name: str) -> None:
        if self._check_names(test_id, step_name):
            return
        with self.writer_lock():
            self._register_step(test_id, step_name)

    def list_steps(self) -> list[tuple[str, str]]:
        """(test id, step name) pairs with a recorded golden master."""
        out = []
        for entry in self._load_index().get("tests", {}).values():
            for step_name in entry["steps"].values():
                if self.golden_master_path(entry["id"], step_name).exists():
                    out.append((entry["id"], step_name))
        return sorted(out)

    # ---- golden masters ----

    def has_golden_master(self, test_id: str, step_name: str) -> bool:
        return self.golden_master_path(test_id, step_name).exists()

    def read_golden_master(self, test_id: str, step_name: str) -> ags.GuiState:
        path = self.golden_master_path(test_id, step_name)
        if not path.exists():
            raise UnknownStep(f"no golden master for test {test_id!r} step {step_name!r}")
        try:
            return ags.load_state(path)
        except OSError as exc:
            raise StoreIOError(f"cannot read {path}: {exc}") from exc
        except (ParseError, WellFormednessViolation) as exc:
            raise CorruptGoldenMaster(f"golden master {path} is unreadable: {exc}") from exc

    def read_actual(self, test_id: str, step_name: str) -> ags.GuiState:
        path = self.actual_path(test_id, step_name)
        if not path.exists():
            raise UnknownStep(f"no recorded actual state for test {test_id!r} step {step_name!r}")
        try:
            return ags.load_state(path)
        except OSError as exc:
            raise StoreIOError(f"cannot read {path}: {exc}") from exc
        except (ParseError, WellFormednessViolation) as exc:
            raise CorruptGoldenMaster(f"recorded actual state {path} is unreadable: {exc}") from exc

    def write_actual(self, test_id: str, step_name: str, actual: ags.GuiState) -> None:
        _atomic_write(self.actual_path(test_id, step_name), ags.serialize(actual))

    def write_report(self, report: DiffReport) -> None:
        path = self.report_path(report.test_id, report.step_name)
        doc = json.dumps(report_to_json(report), ensure_ascii=False, indent=2) + "\n"
        _atomic_write(path, doc.encode())

    def iter_reports(self) -> Iterator[DiffReport]:
        for path in sorted(self.root.glob(f"*/*{REPORT_SUFFIX}")):
            yield load_report(path)

    def checkpoint(
        self,
        test_id: str,
        step_name: str,
        actual: ags.GuiState,
        strategy: Strategy | str | None = None,
        keys: KeyConfig | None = None,
    ) -> DiffReport:
        """Compare ``actual`` against the stored golden master.

        The first checkpoint of a step has nothing to compare against: the
        filtered actual state becomes the golden master and the report
        carries the failing golden-master-created status.
        """
        ags.ensure_well_formed(actual)
        rules = self.rules()
        cfg = self.config()
        chosen = cfg.strategy if strategy is None else Strategy(strategy)
        key_config = cfg.keys if keys is None else keys

        gm_path = self.golden_master_path(test_id, step_name)
        if not gm_path.exists():
            filtered = apply_state_filter(actual, rules)
            created = False
            with self.writer_lock():
                if not gm_path.exists():
                    self._register_step(test_id, step_name)
                    _atomic_write(gm_path, ags.serialize(filtered))
                    created = True
            if created:
                return DiffReport.golden_master_created(test_id, step_name, chosen, filtered)

        self._ensure_registered(test_id, step_name)
        expected = self.read_golden_master(test_id, step_name)
        return execute(
            expected,
            actual,
            rules=rules,
            strategy=chosen,
            config=key_config,
            test_id=test_id,
            step_name=step_name,
        )

    def update_golden_master(
        self,
        test_id: str,
        step_name: str,
        handle: str,
        key: str,
        value: str | None,
    ) -> ags.GuiState:
        """Set (or remove, when ``value`` is None) one attribute of the
        element addressed by ``handle`` and rewrite the golden master.

        Report handles are computed on the filtered view, so the handle is
        resolved against the stored state through the current rule set.
        """
        self._check_names(test_id, step_name)
        with self.writer_lock():
            current = self.read_golden_master(test_id, step_name)
            positions = _filtered_handles(current, self.rules())
            if handle not in positions:
                raise UnknownElement(f"no element with handle {handle!r}")
            updated = _rewrite_attribute(current, positions[handle], key, value)
            _atomic_write(
                self.golden_master_path(test_id, step_name), ags.serialize(updated)
            )
            return updated

    # ---- review artifacts ----

    def append_rule(self, rule: FilterRule) -> None:
        with self.writer_lock():
            try:
                with open(self.rules_path, "a", encoding="utf-8") as fh:
                    fh.write(rule.to_line() + "\n")
            except OSError as exc:
                raise StoreIOError(f"cannot append to {self.rules_path}: {exc}") from exc

    def append_journal(self, entry: dict) -> None:
        with self.writer_lock():
            try:
                with open(self.journal_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
            except OSError as exc:
                raise StoreIOError(f"cannot append to {self.journal_path}: {exc}") from exc

    def read_journal(self) -> list[dict]:
        if not self.journal_path.exists():
            return []
        entries = []
        try:
            with open(self.journal_path, "r", encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        entries.append(json.loads(line))
                    except json.JSONDecodeError as exc:
                        raise StoreError(
                            f"corrupt journal line {line_no} in {self.journal_path}: {exc}"
                        ) from exc
        except OSError as exc:
            raise StoreIOError(f"cannot read {self.journal_path}: {exc}") from exc
        return entries


def _check_entry(
    entry: dict, test_id: str, step_name: str, safe_test: str, safe_step: str
) -> None:
    if entry["id"] != test_id:
        raise StoreError(
            f"test id collision after sanitization: {entry['id']!r} and {test_id!r} "
            f"both map to {safe_test!r}"
        )
    existing = entry["steps"].get(safe_step)
    if existing not in (None, step_name):
        raise StoreError(
            f"step name collision after sanitization: {existing!r} and {step_name!r} "
            f"both map to {safe_step!r}"
        )


def _filtered_handles(state: ags.GuiState, rules: FilterRuleSet) -> dict[str, int]:
    """Map report handles onto pre-order positions of the stored state.

    Reports address elements as the comparison saw them: after filtering,
    with the path attribute when it survived and a positional ``#n``
    fallback otherwise.
    """
    mapping: dict[str, int] = {}
    position = 0
    filtered_order = 0

    def subtree_size(elem: ags.Element) -> int:
        return 1 + sum(subtree_size(child) for child in elem.children)

    def walk(elem: ags.Element) -> None:
        nonlocal position, filtered_order
        own_position = position
        position += 1
        if rules.drops_element(elem):
            position += subtree_size(elem) - 1
            return
        path = elem.get("path")
        if path is not None and rules.drops_attribute(elem, "path"):
            path = None
        handle = path if path is not None else f"#{filtered_order}"
        mapping.setdefault(handle, own_position)
        filtered_order += 1
        for child in elem.children:
            walk(child)

    for root in state.roots:
        walk(root)
    return mapping


def _rewrite_attribute(
    state: ags.GuiState, target_position: int, key: str, value: str | None
) -> ags.GuiState:
    counter = iter(range(ags.node_count(state)))
    hit = False

    def walk(elem: ags.Element) -> ags.Element:
        nonlocal hit
        matched = next(counter) == target_position
        if matched:
            hit = True
            amap = dict(elem.attribute_map())
            if value is None:
                amap.pop(key, None)
            else:
                amap[key] = value
            return ags.element(amap, [walk(c) for c in elem.children])
        return ags.element(dict(elem.attribute_map()), [walk(c) for c in elem.children])

    roots = [walk(r) for r in state.roots]
    if not hit:
        raise UnknownElement(f"no element at position {target_position}")
    return ags.canonicalize(ags.state(*roots))


def _atomic_write(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise StoreIOError(f"cannot write {path}: {exc}") from exc
