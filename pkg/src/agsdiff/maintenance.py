"""Review decisions: accept or ignore reported changes, with propagation.

A change is addressed by its signature: the identifying attribute values
of the element it occurred on, the attribute key, and the expected and
actual values.  Equal signatures across different tests and steps mean
"the very same change", so one decision can cover all of them.
Accepting rewrites the affected golden masters; ignoring appends a rule
to the suite's filter file.  Every applied decision is appended to a
JSON-lines journal, and replaying that journal onto a pristine copy of
the suite reproduces the reviewed state.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import StoreError, UnknownElement, UnknownStep
from .executor import AttributeChange, DiffReport, ElementSummary
from .filters import FilterRule, ignore_attribute, ignore_element_attribute
from .identification import DEFAULT_STRONG_KEYS
from .store import Suite


class Action(Enum):
    ACCEPT = "accept"
    IGNORE = "ignore"


class Scope(Enum):
    SINGLE = "single"
    PROPAGATE = "propagate"


@dataclass(frozen=True, slots=True)
class ChangeSignature:
    """Identity of one attribute-level change, comparable across reports."""

    identity: tuple[tuple[str, str], ...]
    key: str
    expected: str | None
    actual: str | None

    def sort_key(self):
        return (
            self.identity,
            self.key,
            self.expected is not None,
            self.expected or "",
            self.actual is not None,
            self.actual or "",
        )


@dataclass(frozen=True, slots=True)
class Occurrence:
    """One report entry a signature was derived from."""

    test_id: str
    step_name: str
    handle: str
    actual_handle: str


@dataclass(frozen=True, slots=True)
class Decision:
    signature: ChangeSignature
    action: Action
    scope: Scope
    timestamp: str


@dataclass(frozen=True, slots=True)
class OccurrenceStatus:
    occurrence: Occurrence
    status: str  # "updated" | "ignored" | "unknown-step" | "unknown-element"


@dataclass(frozen=True, slots=True)
class ApplySummary:
    decision: Decision
    statuses: tuple[OccurrenceStatus, ...]
    rules_added: tuple[str, ...]

    @property
    def error_count(self) -> int:
        return sum(1 for s in self.statuses if s.status.startswith("unknown"))


def make_decision(
    signature: ChangeSignature, action: Action | str, scope: Scope | str
) -> Decision:
    return Decision(
        signature=signature,
        action=Action(action),
        scope=Scope(scope),
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )


def change_signature(
    summary: ElementSummary,
    change: AttributeChange,
    strong_keys: frozenset[str] = DEFAULT_STRONG_KEYS,
) -> ChangeSignature:
    """Signature of one change; element identity comes from its strong
    keys, falling back to the origin handle for anonymous elements."""
    pairs = tuple(
        sorted((k, summary.attributes[k]) for k in strong_keys if k in summary.attributes)
    )
    if not pairs:
        pairs = (("path", summary.handle),)
    return ChangeSignature(pairs, change.key, change.expected, change.actual)


def group_changes(
    reports: Iterable[DiffReport],
    strong_keys: frozenset[str] = DEFAULT_STRONG_KEYS,
) -> dict[ChangeSignature, list[Occurrence]]:
    """Group every attribute-level change in the reports by signature."""
    groups: dict[ChangeSignature, list[Occurrence]] = {}
    for report in reports:
        for pair in report.attribute_diffs:
            for change in pair.changes:
                sig = change_signature(pair.element, change, strong_keys)
                groups.setdefault(sig, []).append(
                    Occurrence(report.test_id, report.step_name, pair.handle, pair.actual_handle)
                )
    for occurrences in groups.values():
        occurrences.sort(key=lambda o: (o.test_id, o.step_name, o.handle))
    return dict(sorted(groups.items(), key=lambda kv: kv[0].sort_key()))


def apply_decision(
    suite: Suite, decision: Decision, occurrences: list[Occurrence]
) -> ApplySummary:
    """Apply one decision; failures on individual occurrences are
    reported in the summary, not rolled back."""
    if not occurrences:
        raise StoreError("decision has no occurrences to apply to")
    return _apply(suite, decision, occurrences, entry=None)


def _apply(
    suite: Suite,
    decision: Decision,
    occurrences: list[Occurrence],
    entry: dict | None,
) -> ApplySummary:
    targets = occurrences if decision.scope is Scope.PROPAGATE else occurrences[:1]
    statuses: list[OccurrenceStatus] = []
    rules_added: list[str] = []
    with suite.writer_lock():
        if decision.action is Action.ACCEPT:
            for occ in targets:
                try:
                    suite.update_golden_master(
                        occ.test_id,
                        occ.step_name,
                        occ.handle,
                        decision.signature.key,
                        decision.signature.actual,
                    )
                except UnknownStep:
                    statuses.append(OccurrenceStatus(occ, "unknown-step"))
                except UnknownElement:
                    statuses.append(OccurrenceStatus(occ, "unknown-element"))
                else:
                    statuses.append(OccurrenceStatus(occ, "updated"))
        else:
            rule = _ignore_rule(decision, targets[0])
            suite.append_rule(rule)
            rules_added.append(rule.to_line())
            statuses = [OccurrenceStatus(occ, "ignored") for occ in targets]
        if entry is None:
            entry = journal_entry(decision, occurrences, statuses, rules_added)
        suite.append_journal(entry)
    return ApplySummary(decision, tuple(statuses), tuple(rules_added))


def _ignore_rule(decision: Decision, origin: Occurrence) -> FilterRule:
    """Propagated ignores silence the key everywhere; single-scope ones
    are pinned to the element via its id, or its path when anonymous."""
    key = decision.signature.key
    if decision.scope is Scope.PROPAGATE:
        return ignore_attribute(key)
    identity = dict(decision.signature.identity)
    if "id" in identity:
        return ignore_element_attribute("id", identity["id"], key)
    if "path" in identity:
        return ignore_element_attribute("path", identity["path"], key)
    if origin.handle.startswith("/"):
        return ignore_element_attribute("path", origin.handle, key)
    return ignore_attribute(key)


# ---- journal ----


def signature_to_json(sig: ChangeSignature) -> dict:
    return {
        "identity": [[k, v] for k, v in sig.identity],
        "key": sig.key,
        "expected": sig.expected,
        "actual": sig.actual,
    }


def signature_from_json(doc: Mapping) -> ChangeSignature:
    identity = tuple((str(k), str(v)) for k, v in doc["identity"])
    expected = doc["expected"]
    actual = doc["actual"]
    if expected is not None:
        expected = str(expected)
    if actual is not None:
        actual = str(actual)
    return ChangeSignature(identity, str(doc["key"]), expected, actual)


def journal_entry(
    decision: Decision,
    occurrences: list[Occurrence],
    statuses: list[OccurrenceStatus],
    rules_added: list[str],
) -> dict:
    return {
        "time": decision.timestamp,
        "action": decision.action.value,
        "scope": decision.scope.value,
        "signature": signature_to_json(decision.signature),
        "occurrences": [
            {
                "test_id": o.test_id,
                "step_name": o.step_name,
                "handle": o.handle,
                "actual_handle": o.actual_handle,
            }
            for o in occurrences
        ],
        "applied": [{"handle": s.occurrence.handle, "status": s.status} for s in statuses],
        "rules_added": list(rules_added),
    }


def decision_from_journal(entry: Mapping) -> tuple[Decision, list[Occurrence]]:
    decision = Decision(
        signature=signature_from_json(entry["signature"]),
        action=Action(entry["action"]),
        scope=Scope(entry["scope"]),
        timestamp=str(entry["time"]),
    )
    occurrences = [
        Occurrence(o["test_id"], o["step_name"], o["handle"], o["actual_handle"])
        for o in entry["occurrences"]
    ]
    return decision, occurrences


def replay_journal(suite: Suite, entries: Iterable[Mapping]) -> list[ApplySummary]:
    """Re-apply journaled decisions in order, appending the original
    entries verbatim so the replayed journal matches byte for byte."""
    summaries = []
    for entry in entries:
        decision, occurrences = decision_from_journal(entry)
        summaries.append(_apply(suite, decision, occurrences, entry=dict(entry)))
    return summaries
