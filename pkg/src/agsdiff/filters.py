"""Ignore rules: what to drop from states and what differences to suppress.

Rule files (conventionally ``recheck.ignore``) are line oriented::

    # comment
    attribute: background-color
    element: id=carousel
    element: id=sidebar, attribute: text
    pixel-diff: 5

The first three forms remove data from both states before comparison.
``pixel-diff`` suppresses already-derived differences on the geometry
keys (x, y, width, height) whose numeric delta is within the threshold.
Element matchers support the keys ``id``, ``type`` and ``path`` and
match exact attribute values.  When several pixel-diff lines parse, the
last one wins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .ags import Element, GuiState
from .errors import RuleParseError

GEOMETRY_KEYS = frozenset({"x", "y", "width", "height"})
MATCHER_KEYS = frozenset({"id", "type", "path"})

_INT_RE = re.compile(r"[+-]?\d+")


class RuleKind(Enum):
    ATTRIBUTE = "ignore-attribute-globally"
    ELEMENT = "ignore-element"
    ELEMENT_ATTRIBUTE = "ignore-attribute-of-element"
    PIXEL_DIFF = "pixel-diff-threshold"


@dataclass(frozen=True, slots=True)
class ElementMatcher:
    key: str
    value: str

    def __post_init__(self) -> None:
        if self.key not in MATCHER_KEYS:
            raise ValueError(f"matcher key must be one of {sorted(MATCHER_KEYS)}")

    def matches(self, elem: Element) -> bool:
        return elem.get(self.key) == self.value


@dataclass(frozen=True, slots=True)
class FilterRule:
    kind: RuleKind
    attribute_key: str | None = None
    matcher: ElementMatcher | None = None
    threshold: int | None = None

    def to_line(self) -> str:
        if self.kind is RuleKind.ATTRIBUTE:
            return f"attribute: {self.attribute_key}"
        if self.kind is RuleKind.ELEMENT:
            return f"element: {self.matcher.key}={self.matcher.value}"
        if self.kind is RuleKind.ELEMENT_ATTRIBUTE:
            return f"element: {self.matcher.key}={self.matcher.value}, attribute: {self.attribute_key}"
        return f"pixel-diff: {self.threshold}"


def ignore_attribute(key: str) -> FilterRule:
    return FilterRule(RuleKind.ATTRIBUTE, attribute_key=key)


def ignore_element(matcher_key: str, value: str) -> FilterRule:
    return FilterRule(RuleKind.ELEMENT, matcher=ElementMatcher(matcher_key, value))


def ignore_element_attribute(matcher_key: str, value: str, attribute_key: str) -> FilterRule:
    return FilterRule(
        RuleKind.ELEMENT_ATTRIBUTE,
        attribute_key=attribute_key,
        matcher=ElementMatcher(matcher_key, value),
    )


def pixel_diff(threshold: int) -> FilterRule:
    if threshold < 0:
        raise ValueError("pixel-diff threshold must be non-negative")
    return FilterRule(RuleKind.PIXEL_DIFF, threshold=threshold)


@dataclass(frozen=True)
class FilterRuleSet:
    rules: tuple[FilterRule, ...] = ()

    # Derived lookups, computed once at construction.
    _global_keys: frozenset[str] = field(init=False, repr=False, compare=False)
    _element_matchers: tuple[ElementMatcher, ...] = field(init=False, repr=False, compare=False)
    _scoped_attributes: tuple[tuple[ElementMatcher, str], ...] = field(init=False, repr=False, compare=False)
    _pixel_threshold: int | None = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        global_keys: set[str] = set()
        matchers: list[ElementMatcher] = []
        scoped: list[tuple[ElementMatcher, str]] = []
        threshold: int | None = None
        for rule in self.rules:
            if rule.kind is RuleKind.ATTRIBUTE:
                global_keys.add(rule.attribute_key)
            elif rule.kind is RuleKind.ELEMENT:
                matchers.append(rule.matcher)
            elif rule.kind is RuleKind.ELEMENT_ATTRIBUTE:
                scoped.append((rule.matcher, rule.attribute_key))
            else:
                threshold = rule.threshold  # last pixel-diff rule wins
        object.__setattr__(self, "_global_keys", frozenset(global_keys))
        object.__setattr__(self, "_element_matchers", tuple(matchers))
        object.__setattr__(self, "_scoped_attributes", tuple(scoped))
        object.__setattr__(self, "_pixel_threshold", threshold)

    @property
    def pixel_threshold(self) -> int | None:
        return self._pixel_threshold

    def drops_element(self, elem: Element) -> bool:
        return any(m.matches(elem) for m in self._element_matchers)

    def drops_attribute(self, elem: Element, key: str) -> bool:
        if key in self._global_keys:
            return True
        return any(key == attr_key and m.matches(elem) for m, attr_key in self._scoped_attributes)


EMPTY_RULES = FilterRuleSet()


# ---- parsing ----

_ELEMENT_RE = re.compile(
    r"^element:\s*(?P<key>[^=,]+?)\s*=\s*(?P<value>.*?)"
    r"(?:\s*,\s*attribute:\s*(?P<attr>.+?)\s*)?$"
)


def parse_rules(text: str) -> FilterRuleSet:
    """Parse rule-file content; raises :class:`RuleParseError` with the line number."""
    rules: list[FilterRule] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rules.append(_parse_line(line, line_no))
    return FilterRuleSet(tuple(rules))


def _parse_line(line: str, line_no: int) -> FilterRule:
    if line.startswith("attribute:"):
        key = line[len("attribute:"):].strip()
        if not key:
            raise RuleParseError("attribute rule needs a key", line=line_no)
        return ignore_attribute(key)

    if line.startswith("element:"):
        match = _ELEMENT_RE.match(line)
        if not match:
            raise RuleParseError(f"malformed element rule: {line!r}", line=line_no)
        key, value, attr = match.group("key"), match.group("value"), match.group("attr")
        if key not in MATCHER_KEYS:
            raise RuleParseError(
                f"element matcher key must be one of {sorted(MATCHER_KEYS)}, got {key!r}",
                line=line_no,
            )
        if attr is not None:
            if not attr:
                raise RuleParseError("attribute clause needs a key", line=line_no)
            return ignore_element_attribute(key, value, attr)
        return ignore_element(key, value)

    if line.startswith("pixel-diff:"):
        raw_value = line[len("pixel-diff:"):].strip()
        if not _INT_RE.fullmatch(raw_value) or int(raw_value) < 0:
            raise RuleParseError(
                f"pixel-diff needs a non-negative integer, got {raw_value!r}", line=line_no
            )
        return pixel_diff(int(raw_value))

    raise RuleParseError(f"unknown rule {line.split(':')[0]!r}", line=line_no)


def load_rules(path) -> FilterRuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rules(fh.read())


# ---- state-level filtering ----


def apply_state_filter(value: GuiState, rules: FilterRuleSet) -> GuiState:
    """Remove ignored elements (with their subtrees) and ignored attributes.

    The hierarchy of surviving elements is unchanged; the result is
    well-formed whenever the input is.  Filtering is idempotent.
    """
    return GuiState(tuple(_filter_elements(value.roots, rules)))


def _filter_elements(elems: Iterable[Element], rules: FilterRuleSet) -> list[Element]:
    out: list[Element] = []
    for elem in elems:
        if rules.drops_element(elem):
            continue
        attrs = tuple(a for a in elem.attributes if not rules.drops_attribute(elem, a.key))
        out.append(Element(attrs, tuple(_filter_elements(elem.children, rules))))
    return out


# ---- difference-level suppression ----


def suppress_difference(key: str, expected: str, actual: str, rules: FilterRuleSet) -> bool:
    """True iff a pixel-diff rule absorbs this attribute value difference.

    Only the geometry keys qualify, both values must parse as decimal
    integers, and the absolute delta must be within the threshold.
    """
    threshold = rules.pixel_threshold
    if threshold is None or key not in GEOMETRY_KEYS:
        return False
    if not _INT_RE.fullmatch(expected) or not _INT_RE.fullmatch(actual):
        return False
    return abs(int(expected) - int(actual)) <= threshold
