"""Platform-independent GUI state trees.

A :class:`GuiState` is a forest of :class:`Element` nodes.  Every element
carries an ordered tuple of string attributes plus an ordered tuple of
children.  A state is well-formed when no element repeats an attribute
key.  The canonical form sorts each attribute set ascending by key, so
two states describing the same GUI serialize to identical bytes.

States persist as UTF-8 JSON with the ``.ags.json`` suffix::

    {"roots": [{"attributes": {"id": "login", ...}, "children": [...]}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import ParseError, WellFormednessViolation

AGS_SUFFIX = ".ags.json"


@dataclass(frozen=True, slots=True)
class Attribute:
    key: str
    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.key, str) or not isinstance(self.value, str):
            raise TypeError("attribute keys and values must be strings")
        if not self.key:
            raise ValueError("attribute key must not be empty")


@dataclass(frozen=True, slots=True)
class Element:
    attributes: tuple[Attribute, ...] = ()
    children: tuple["Element", ...] = ()

    def get(self, key: str, default: str | None = None) -> str | None:
        """Value of the first attribute named ``key``, or ``default``."""
        for attr in self.attributes:
            if attr.key == key:
                return attr.value
        return default

    def attribute_map(self) -> dict[str, str]:
        """Attributes as a dict; first occurrence wins on duplicate keys."""
        out: dict[str, str] = {}
        for attr in self.attributes:
            out.setdefault(attr.key, attr.value)
        return out


@dataclass(frozen=True, slots=True)
class GuiState:
    roots: tuple[Element, ...] = ()


def element(
    attrs: Mapping[str, str] | Iterable[tuple[str, str]] = (),
    children: Iterable[Element] = (),
) -> Element:
    """Convenience constructor from a mapping or (key, value) pairs."""
    pairs = attrs.items() if isinstance(attrs, Mapping) else attrs
    return Element(tuple(Attribute(k, v) for k, v in pairs), tuple(children))


def state(*roots: Element) -> GuiState:
    return GuiState(tuple(roots))


def iter_elements(value: GuiState | Element) -> Iterator[Element]:
    """Pre-order walk over all elements of a state (or a subtree)."""
    stack = list(reversed(value.roots if isinstance(value, GuiState) else (value,)))
    while stack:
        elem = stack.pop()
        yield elem
        stack.extend(reversed(elem.children))


def node_count(value: GuiState | Element) -> int:
    return sum(1 for _ in iter_elements(value))


def element_handle(elem: Element, preorder_index: int) -> str:
    """Stable display handle: the path attribute, or a positional fallback."""
    path = elem.get("path")
    return path if path is not None else f"#{preorder_index}"


def iter_with_handles(value: GuiState | Element) -> Iterator[tuple[str, Element]]:
    for index, elem in enumerate(iter_elements(value)):
        yield element_handle(elem, index), elem


def is_well_formed(value: GuiState | Element) -> bool:
    """True iff no element in the tree repeats an attribute key."""
    for elem in iter_elements(value):
        seen: set[str] = set()
        for attr in elem.attributes:
            if attr.key in seen:
                return False
            seen.add(attr.key)
    return True


def ensure_well_formed(value: GuiState | Element) -> None:
    for elem in iter_elements(value):
        seen: set[str] = set()
        for attr in elem.attributes:
            if attr.key in seen:
                raise WellFormednessViolation(
                    f"attribute key {attr.key!r} appears more than once on one element"
                )
            seen.add(attr.key)


def canonicalize(value: GuiState) -> GuiState:
    """Sort every attribute set ascending by key.

    Canonicalization is idempotent and key order is the only thing it
    changes.  Raises :class:`WellFormednessViolation` on duplicate keys.
    """
    ensure_well_formed(value)
    return GuiState(tuple(_canonical_element(root) for root in value.roots))


def _canonical_element(elem: Element) -> Element:
    attrs = tuple(sorted(elem.attributes, key=lambda a: a.key))
    return Element(attrs, tuple(_canonical_element(child) for child in elem.children))


# ---- serialization ----


def serialize(value: GuiState) -> bytes:
    """Canonical UTF-8 JSON bytes for a well-formed state."""
    canonical = canonicalize(value)
    doc = {"roots": [_element_to_json(root) for root in canonical.roots]}
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _element_to_json(elem: Element) -> dict:
    return {
        "attributes": {attr.key: attr.value for attr in elem.attributes},
        "children": [_element_to_json(child) for child in elem.children],
    }


class _JsonObject:
    """Raw JSON object as an ordered pair list, so duplicate keys survive parsing."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: list[tuple[str, object]]):
        self.pairs = pairs


def deserialize(data: bytes | str) -> GuiState:
    """Parse ``.ags.json`` content back into a canonical state.

    Raises :class:`ParseError` (with line/column where available) on
    malformed input and :class:`WellFormednessViolation` when an
    attribute object repeats a key.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text, object_pairs_hook=lambda pairs: _JsonObject(pairs))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None

    if not isinstance(raw, _JsonObject):
        raise ParseError("top level must be a JSON object")
    top = _pairs_to_dict(raw, context="top level")
    if set(top) != {"roots"}:
        raise ParseError("top level must contain exactly the key 'roots'")
    if not isinstance(top["roots"], list):
        raise ParseError("'roots' must be an array")
    roots = tuple(_element_from_json(item) for item in top["roots"])
    return canonicalize(GuiState(roots))


def _pairs_to_dict(obj: _JsonObject, context: str) -> dict:
    out: dict = {}
    for key, value in obj.pairs:
        if key in out:
            raise ParseError(f"duplicate key {key!r} in {context}")
        out[key] = value
    return out


def _element_from_json(item: object) -> Element:
    if not isinstance(item, _JsonObject):
        raise ParseError("element must be a JSON object")
    fields = _pairs_to_dict(item, context="element object")
    unknown = set(fields) - {"attributes", "children"}
    if unknown:
        raise ParseError(f"unknown element keys: {sorted(unknown)}")

    attrs: list[Attribute] = []
    raw_attrs = fields.get("attributes", _JsonObject([]))
    if not isinstance(raw_attrs, _JsonObject):
        raise ParseError("'attributes' must be a JSON object")
    seen: set[str] = set()
    for key, value in raw_attrs.pairs:
        if not isinstance(value, str):
            raise ParseError(f"attribute {key!r} has a non-string value")
        if key in seen:
            raise WellFormednessViolation(
                f"attribute key {key!r} appears more than once on one element"
            )
        seen.add(key)
        attrs.append(Attribute(key, value))

    raw_children = fields.get("children", [])
    if not isinstance(raw_children, list):
        raise ParseError("'children' must be an array")
    children = tuple(_element_from_json(child) for child in raw_children)
    return Element(tuple(attrs), children)


def load_state(path) -> GuiState:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def save_state(path, value: GuiState) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(value))
