"""DOM snapshot ingestion: turns flat browser dumps into attribute trees.

A snapshot file records one record per DOM node: its absolute XPath, its
HTML and CSS attributes, its viewport rectangle, and optionally its text.
The XPath is the only structural information, so ``construct_ags`` sorts
the records from root to leaves and attaches each one to the element
whose path is its longest proper prefix.  Attribute values that match a
known default are dropped; the path, tag name, text, and geometry are
added as derived attributes.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from typing import AbstractSet, Mapping

from . import ags
from .errors import OrphanWarning, SnapshotParseError

SNAPSHOT_SUFFIX = ".snap.json"

DefaultsTable = Mapping[str, AbstractSet[str]]

# Values every mainstream browser reports for elements that do not set the
# property; per-tag defaults (display and friends) vary too much to bake in.
BUILTIN_DEFAULTS: DefaultsTable = {
    "background-color": frozenset({"rgba(0, 0, 0, 0)", "transparent"}),
    "border-style": frozenset({"none"}),
    "box-shadow": frozenset({"none"}),
    "cursor": frozenset({"auto"}),
    "float": frozenset({"none"}),
    "font-style": frozenset({"normal"}),
    "font-weight": frozenset({"400", "normal"}),
    "opacity": frozenset({"1"}),
    "outline-style": frozenset({"none"}),
    "overflow": frozenset({"visible"}),
    "position": frozenset({"static"}),
    "text-decoration-line": frozenset({"none"}),
    "visibility": frozenset({"visible"}),
    "z-index": frozenset({"auto"}),
}

_SEGMENT_RE = re.compile(r"(?P<tag>[^/\[\]]+)\[(?P<index>[1-9][0-9]*)\]")

_NODE_KEYS = {"path", "html", "css", "rect", "text"}
_RECT_KEYS = {"x", "y", "w", "h"}


@dataclass(frozen=True, slots=True)
class SnapshotNode:
    """One DOM node as extracted by a browser-side walker."""

    path: str
    html_attributes: Mapping[str, str] = field(default_factory=dict)
    css_attributes: Mapping[str, str] = field(default_factory=dict)
    x: int = 0
    y: int = 0
    width: int = 0
    height: int = 0
    text: str | None = None


def split_path(path: str) -> tuple[tuple[str, int], ...]:
    """(tag, index) pairs of an absolute XPath such as ``/html[1]/body[2]``."""
    if not isinstance(path, str) or not path.startswith("/") or len(path) < 2:
        raise SnapshotParseError(
            f"invalid XPath {path!r}: expected an absolute path of tag[index] segments"
        )
    segments = []
    for raw in path[1:].split("/"):
        match = _SEGMENT_RE.fullmatch(raw)
        if match is None:
            raise SnapshotParseError(
                f"invalid XPath segment {raw!r} in {path!r}: expected tag[index] with a 1-based index"
            )
        segments.append((match.group("tag"), int(match.group("index"))))
    return tuple(segments)


def parent_path(path: str) -> str | None:
    """The path one segment up, or None for a depth-one path."""
    cut = path.rfind("/")
    return path[:cut] if cut > 0 else None


def parse_snapshot(data: bytes | str) -> list[SnapshotNode]:
    """Parse and validate snapshot bytes into a flat node list."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SnapshotParseError(f"snapshot is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SnapshotParseError("snapshot document must be a JSON object")
    unknown = set(doc) - {"nodes"}
    if unknown:
        raise SnapshotParseError(f"unknown snapshot keys: {sorted(unknown)}")
    raw_nodes = doc.get("nodes", [])
    if not isinstance(raw_nodes, list):
        raise SnapshotParseError("'nodes' must be an array")

    nodes: list[SnapshotNode] = []
    seen: set[str] = set()
    for position, raw in enumerate(raw_nodes):
        node = _parse_node(raw, position)
        if node.path in seen:
            raise SnapshotParseError(f"node {position}: duplicate path {node.path!r}")
        seen.add(node.path)
        nodes.append(node)
    return nodes


def _parse_node(raw: object, position: int) -> SnapshotNode:
    where = f"node {position}"
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{where}: must be a JSON object")
    unknown = set(raw) - _NODE_KEYS
    if unknown:
        raise SnapshotParseError(f"{where}: unknown keys {sorted(unknown)}")
    if "path" not in raw:
        raise SnapshotParseError(f"{where}: missing 'path'")
    path = raw["path"]
    split_path(path)  # raises on malformed paths

    html = _parse_attribute_map(raw.get("html", {}), where, "html")
    css = _parse_attribute_map(raw.get("css", {}), where, "css")
    x, y, w, h = _parse_rect(raw.get("rect"), where)
    if w < 0 or h < 0:
        raise SnapshotParseError(f"{where}: negative width/height in rect")

    text = raw.get("text")
    if text is not None and not isinstance(text, str):
        raise SnapshotParseError(f"{where}: 'text' must be a string")
    return SnapshotNode(
        path=path,
        html_attributes=html,
        css_attributes=css,
        x=x,
        y=y,
        width=w,
        height=h,
        text=text,
    )


def _parse_attribute_map(raw: object, where: str, label: str) -> dict[str, str]:
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{where}: '{label}' must be an object")
    for key, value in raw.items():
        if not key:
            raise SnapshotParseError(f"{where}: empty attribute key in '{label}'")
        if not isinstance(value, str):
            raise SnapshotParseError(
                f"{where}: value of {label} attribute {key!r} must be a string"
            )
    return dict(raw)


def _parse_rect(raw: object, where: str) -> tuple[int, int, int, int]:
    if raw is None:
        return 0, 0, 0, 0
    if not isinstance(raw, dict):
        raise SnapshotParseError(f"{where}: 'rect' must be an object")
    unknown = set(raw) - _RECT_KEYS
    if unknown:
        raise SnapshotParseError(f"{where}: unknown rect keys {sorted(unknown)}")
    values = []
    for key in ("x", "y", "w", "h"):
        value = raw.get(key, 0)
        if isinstance(value, bool) or not isinstance(value, int):
            raise SnapshotParseError(f"{where}: rect {key!r} must be an integer")
        values.append(value)
    return tuple(values)  # type: ignore[return-value]


def construct_ags(
    nodes: list[SnapshotNode], defaults: DefaultsTable = BUILTIN_DEFAULTS
) -> ags.GuiState:
    """Assemble validated nodes into a canonical state.

    Nodes are processed from root to leaves; siblings are ordered by their
    XPath index, with input order deciding between same-index segments of
    different tags.  A node whose direct parent path is missing from the
    snapshot raises :class:`OrphanWarning` and attaches to its nearest
    present ancestor, or becomes a root when it has none.
    """
    segments = {node.path: split_path(node.path) for node in nodes}
    order = sorted(
        range(len(nodes)),
        key=lambda i: (len(segments[nodes[i].path]), segments[nodes[i].path][-1][1]),
    )
    present = set(segments)
    by_path = {node.path: node for node in nodes}
    children: dict[str, list[str]] = {}
    roots: list[str] = []

    for i in order:
        path = nodes[i].path
        direct = parent_path(path)
        if direct is not None and direct not in present:
            warnings.warn(
                OrphanWarning(f"node {path!r}: parent path {direct!r} missing from snapshot")
            )
        ancestor = direct
        while ancestor is not None and ancestor not in present:
            ancestor = parent_path(ancestor)
        if ancestor is None:
            roots.append(path)
        else:
            children.setdefault(ancestor, []).append(path)

    def build(path: str) -> ags.Element:
        node = by_path[path]
        kids = [build(child) for child in children.get(path, ())]
        return ags.element(_node_attributes(node, segments[path], defaults), kids)

    return ags.canonicalize(ags.state(*[build(path) for path in roots]))


def _node_attributes(
    node: SnapshotNode, segments: tuple[tuple[str, int], ...], defaults: DefaultsTable
) -> dict[str, str]:
    merged = dict(node.html_attributes)
    merged.update(node.css_attributes)  # css wins on shared keys
    kept = {
        key: value for key, value in merged.items() if value not in defaults.get(key, ())
    }
    kept["path"] = node.path
    kept["type"] = segments[-1][0]
    if node.text is not None:
        kept["text"] = node.text
    kept["x"] = str(node.x)
    kept["y"] = str(node.y)
    kept["width"] = str(node.width)
    kept["height"] = str(node.height)
    return kept


def serialize_snapshot(nodes: list[SnapshotNode]) -> bytes:
    """Wire-format bytes for a node list; inverse of :func:`parse_snapshot`."""
    doc = {"nodes": []}
    for node in nodes:
        raw: dict = {"path": node.path}
        if node.html_attributes:
            raw["html"] = dict(node.html_attributes)
        if node.css_attributes:
            raw["css"] = dict(node.css_attributes)
        raw["rect"] = {"x": node.x, "y": node.y, "w": node.width, "h": node.height}
        if node.text is not None:
            raw["text"] = node.text
        doc["nodes"].append(raw)
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode()


def load_snapshot(path) -> list[SnapshotNode]:
    with open(path, "rb") as fh:
        return parse_snapshot(fh.read())


def load_snapshot_state(path, defaults: DefaultsTable = BUILTIN_DEFAULTS) -> ags.GuiState:
    return construct_ags(load_snapshot(path), defaults)


def load_defaults(path) -> dict[str, frozenset[str]]:
    """Read a defaults table: a JSON object mapping key to a value list."""
    with open(path, "rb") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SnapshotParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SnapshotParseError("defaults table must be a JSON object")
    table: dict[str, frozenset[str]] = {}
    for key, values in doc.items():
        if not key:
            raise SnapshotParseError("defaults table keys must be non-empty")
        if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
            raise SnapshotParseError(f"defaults for {key!r} must be a list of strings")
        table[key] = frozenset(values)
    return table
