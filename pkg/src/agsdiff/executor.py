"""Comparison pipeline: filter, test equality, identify, explain.

``execute`` filters both states, returns an ok report when they are
equal, and otherwise identifies elements across the two states and
derives per-pair attribute differences (with pixel-diff suppression
applied).  The outcome is a :class:`DiffReport`, the unit every other
component consumes: the golden-master store persists it, the review
tooling groups its entries, the benchmark scores it.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from . import ags, relations
from .filters import EMPTY_RULES, FilterRuleSet, apply_state_filter
from .identification import (
    DEFAULT_CONFIG,
    ExtractedElement,
    KeyConfig,
    Strategy,
    identify,
)

REPORT_SUFFIX = ".report.json"
SUMMARY_ATTRIBUTE_LIMIT = 8

# Listed first in element summaries so identifying keys survive truncation.
SUMMARY_PRIORITY_KEYS = ("id", "name", "path", "type")


class Status(Enum):
    OK = "ok"
    DIFFERENCES = "differences"
    GOLDEN_MASTER_CREATED = "golden-master-created"


@dataclass(frozen=True, slots=True)
class ElementSummary:
    handle: str
    type: str | None
    attributes: dict[str, str]
    attribute_count: int


@dataclass(frozen=True, slots=True)
class AttributeChange:
    """One attribute difference; ``expected``/``actual`` are None when the
    key exists on only one side."""

    key: str
    expected: str | None
    actual: str | None


@dataclass(frozen=True, slots=True)
class PairDiff:
    handle: str
    actual_handle: str
    element: ElementSummary
    changes: tuple[AttributeChange, ...]


@dataclass(frozen=True, slots=True)
class Metrics:
    expected_elements: int
    actual_elements: int
    deleted: int
    created: int
    maintained: int
    duration_ms: float


@dataclass(frozen=True, slots=True)
class DiffReport:
    test_id: str
    step_name: str
    status: Status
    strategy: str
    deleted: tuple[ElementSummary, ...]
    created: tuple[ElementSummary, ...]
    attribute_diffs: tuple[PairDiff, ...]
    metrics: Metrics

    @property
    def difference_count(self) -> int:
        return len(self.deleted) + len(self.created) + len(self.attribute_diffs)

    @classmethod
    def golden_master_created(
        cls,
        test_id: str,
        step_name: str,
        strategy: Strategy | str,
        recorded: ags.GuiState,
    ) -> DiffReport:
        """Report for a step that had no golden master before this run."""
        count = ags.node_count(recorded)
        return cls(
            test_id=test_id,
            step_name=step_name,
            status=Status.GOLDEN_MASTER_CREATED,
            strategy=Strategy(strategy).value,
            deleted=(),
            created=(),
            attribute_diffs=(),
            metrics=Metrics(count, count, 0, 0, count, 0.0),
        )


def summarize(element: ExtractedElement) -> ElementSummary:
    attrs = element.attributes
    ordered = [k for k in SUMMARY_PRIORITY_KEYS if k in attrs]
    ordered += [k for k in sorted(attrs) if k not in SUMMARY_PRIORITY_KEYS]
    return ElementSummary(
        handle=element.origin_path,
        type=attrs.get("type"),
        attributes={k: attrs[k] for k in ordered[:SUMMARY_ATTRIBUTE_LIMIT]},
        attribute_count=len(attrs),
    )


def pair_changes(
    expected: ExtractedElement,
    actual: ExtractedElement,
    rules: FilterRuleSet = EMPTY_RULES,
) -> tuple[AttributeChange, ...]:
    """Attribute differences of a maintained pair, suppression applied."""
    proof = relations.derive_element_inequality(
        ags.element(expected.attributes), ags.element(actual.attributes), rules
    )
    if proof is None:
        return ()
    return tuple(
        AttributeChange(leaf.key, leaf.expected_value, leaf.actual_value)
        for leaf in relations.iter_leaves(proof)
    )


def execute(
    expected: ags.GuiState,
    actual: ags.GuiState,
    rules: FilterRuleSet = EMPTY_RULES,
    strategy: Strategy | str = Strategy.MATCHING,
    config: KeyConfig = DEFAULT_CONFIG,
    test_id: str = "",
    step_name: str = "",
) -> DiffReport:
    """Compare two well-formed states and report their differences."""
    strategy = Strategy(strategy)
    started = time.perf_counter()

    expected = apply_state_filter(expected, rules)
    actual = apply_state_filter(actual, rules)

    if relations.derive_equality(expected, actual):
        count = ags.node_count(expected)
        return DiffReport(
            test_id=test_id,
            step_name=step_name,
            status=Status.OK,
            strategy=strategy.value,
            deleted=(),
            created=(),
            attribute_diffs=(),
            metrics=Metrics(count, count, 0, 0, count, _elapsed_ms(started)),
        )

    result = identify(expected, actual, strategy, config)
    diffs: list[PairDiff] = []
    for exp_elem, act_elem in result.maintained:
        changes = pair_changes(exp_elem, act_elem, rules)
        if changes:
            diffs.append(
                PairDiff(
                    handle=exp_elem.origin_path,
                    actual_handle=act_elem.origin_path,
                    element=summarize(exp_elem),
                    changes=changes,
                )
            )

    deleted = tuple(summarize(e) for e in result.deleted)
    created = tuple(summarize(e) for e in result.created)
    status = Status.DIFFERENCES if (deleted or created or diffs) else Status.OK
    expected_count = len(result.deleted) + len(result.maintained)
    actual_count = len(result.created) + len(result.maintained)
    return DiffReport(
        test_id=test_id,
        step_name=step_name,
        status=status,
        strategy=strategy.value,
        deleted=deleted,
        created=created,
        attribute_diffs=tuple(diffs),
        metrics=Metrics(
            expected_count,
            actual_count,
            len(deleted),
            len(created),
            len(result.maintained),
            _elapsed_ms(started),
        ),
    )


def _elapsed_ms(started: float) -> float:
    return (time.perf_counter() - started) * 1000.0


# ---- serialization ----


def report_to_json(report: DiffReport) -> dict:
    return {
        "test_id": report.test_id,
        "step_name": report.step_name,
        "status": report.status.value,
        "strategy": report.strategy,
        "deleted": [_summary_to_json(s) for s in report.deleted],
        "created": [_summary_to_json(s) for s in report.created],
        "attribute_diffs": [
            {
                "handle": d.handle,
                "actual_handle": d.actual_handle,
                "element": _summary_to_json(d.element),
                "changes": [
                    {"key": c.key, "expected": c.expected, "actual": c.actual}
                    for c in d.changes
                ],
            }
            for d in report.attribute_diffs
        ],
        "metrics": {
            "expected_elements": report.metrics.expected_elements,
            "actual_elements": report.metrics.actual_elements,
            "deleted": report.metrics.deleted,
            "created": report.metrics.created,
            "maintained": report.metrics.maintained,
            "duration_ms": report.metrics.duration_ms,
        },
    }


def _summary_to_json(summary: ElementSummary) -> dict:
    return {
        "handle": summary.handle,
        "type": summary.type,
        "attributes": summary.attributes,
        "attribute_count": summary.attribute_count,
    }


def report_from_json(doc: dict) -> DiffReport:
    metrics = doc["metrics"]
    return DiffReport(
        test_id=doc["test_id"],
        step_name=doc["step_name"],
        status=Status(doc["status"]),
        strategy=doc["strategy"],
        deleted=tuple(_summary_from_json(s) for s in doc["deleted"]),
        created=tuple(_summary_from_json(s) for s in doc["created"]),
        attribute_diffs=tuple(
            PairDiff(
                handle=d["handle"],
                actual_handle=d["actual_handle"],
                element=_summary_from_json(d["element"]),
                changes=tuple(
                    AttributeChange(c["key"], c["expected"], c["actual"])
                    for c in d["changes"]
                ),
            )
            for d in doc["attribute_diffs"]
        ),
        metrics=Metrics(
            metrics["expected_elements"],
            metrics["actual_elements"],
            metrics["deleted"],
            metrics["created"],
            metrics["maintained"],
            metrics["duration_ms"],
        ),
    )


def _summary_from_json(doc: dict) -> ElementSummary:
    return ElementSummary(
        handle=doc["handle"],
        type=doc["type"],
        attributes=dict(doc["attributes"]),
        attribute_count=doc["attribute_count"],
    )


def save_report(path, report: DiffReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_json(report), fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def load_report(path) -> DiffReport:
    with open(path, "r", encoding="utf-8") as fh:
        return report_from_json(json.load(fh))
