from __future__ import annotations

import contextlib
import json
import random
import warnings as _warnings

import pytest

from agsdiff import ags
from agsdiff.ags import element, state
from agsdiff.errors import OrphanWarning, SnapshotParseError
from agsdiff.snapshot import (
    BUILTIN_DEFAULTS,
    SnapshotNode,
    construct_ags,
    load_defaults,
    load_snapshot_state,
    parse_snapshot,
    parent_path,
    split_path,
)


def snap(*nodes) -> bytes:
    return json.dumps({"nodes": list(nodes)}).encode()


FOUR_NODE_SNAPSHOT = snap(
    {"path": "/html[1]", "html": {"lang": "en"}},
    {"path": "/html[1]/head[1]"},
    {"path": "/html[1]/body[1]"},
    {"path": "/html[1]/body[1]/button[1]", "html": {"name": "foo"}, "text": "bar"},
)

ZERO_RECT = {"x": "0", "y": "0", "width": "0", "height": "0"}


class TestSplitPath:
    def test_segments(self):
        assert split_path("/html[1]/body[2]/a[10]") == (("html", 1), ("body", 2), ("a", 10))

    @pytest.mark.parametrize(
        "bad",
        ["", "/", "html[1]", "/html", "/html[0]", "/html[01]", "/html[1]//a[1]", "/html[1]/", "/[1]"],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(SnapshotParseError):
            split_path(bad)

    def test_parent_path(self):
        assert parent_path("/a[1]/b[1]/c[1]") == "/a[1]/b[1]"
        assert parent_path("/a[1]") is None


class TestParseSnapshot:
    def test_minimal_single_node(self):
        nodes = parse_snapshot(snap({"path": "/html[1]"}))
        assert len(nodes) == 1
        assert nodes[0] == SnapshotNode(path="/html[1]")

    def test_four_node_fixture_paths(self):
        nodes = parse_snapshot(FOUR_NODE_SNAPSHOT)
        assert [n.path for n in nodes] == [
            "/html[1]",
            "/html[1]/head[1]",
            "/html[1]/body[1]",
            "/html[1]/body[1]/button[1]",
        ]
        assert nodes[3].text == "bar"
        assert nodes[3].html_attributes == {"name": "foo"}

    def test_rect_fields(self):
        (node,) = parse_snapshot(
            snap({"path": "/a[1]", "rect": {"x": -5, "y": 2, "w": 30, "h": 40}})
        )
        assert (node.x, node.y, node.width, node.height) == (-5, 2, 30, 40)

    def test_rect_defaults_to_zero(self):
        (node,) = parse_snapshot(snap({"path": "/a[1]"}))
        assert (node.x, node.y, node.width, node.height) == (0, 0, 0, 0)
        (partial,) = parse_snapshot(snap({"path": "/a[1]", "rect": {"x": 7}}))
        assert (partial.x, partial.y, partial.width, partial.height) == (7, 0, 0, 0)

    def test_duplicate_path_rejected(self):
        with pytest.raises(SnapshotParseError, match="duplicate path"):
            parse_snapshot(snap({"path": "/a[1]"}, {"path": "/a[1]"}))

    def test_negative_size_rejected(self):
        with pytest.raises(SnapshotParseError, match="negative width/height"):
            parse_snapshot(snap({"path": "/a[1]", "rect": {"w": -1}}))

    def test_missing_path_rejected(self):
        with pytest.raises(SnapshotParseError, match="missing 'path'"):
            parse_snapshot(snap({"html": {}}))

    @pytest.mark.parametrize(
        "raw",
        [
            {"path": "/a[1]", "bogus": 1},
            {"path": "/a[1]", "html": {"k": 3}},
            {"path": "/a[1]", "html": {"": "v"}},
            {"path": "/a[1]", "css": "nope"},
            {"path": "/a[1]", "rect": {"q": 1}},
            {"path": "/a[1]", "rect": {"w": 1.5}},
            {"path": "/a[1]", "rect": {"w": True}},
            {"path": "/a[1]", "text": 5},
            {"path": 5},
        ],
    )
    def test_bad_node_shapes(self, raw):
        with pytest.raises(SnapshotParseError):
            parse_snapshot(snap(raw))

    def test_bad_document_shapes(self):
        with pytest.raises(SnapshotParseError):
            parse_snapshot(b"[]")
        with pytest.raises(SnapshotParseError, match="unknown snapshot keys"):
            parse_snapshot(b'{"nodes": [], "extra": 1}')
        with pytest.raises(SnapshotParseError, match="must be an array"):
            parse_snapshot(b'{"nodes": {}}')

    def test_json_error_carries_position(self):
        with pytest.raises(SnapshotParseError) as info:
            parse_snapshot(b'{"nodes": [}')
        assert info.value.line == 1
        assert "line 1" in str(info.value)


def node_attrs(**extra):
    return dict(ZERO_RECT, **extra)


class TestConstructAgs:
    def test_single_root(self):
        out = construct_ags(parse_snapshot(snap({"path": "/html[1]"})))
        assert out == ags.canonicalize(
            state(element(node_attrs(path="/html[1]", type="html")))
        )

    def test_four_node_page(self):
        out = construct_ags(parse_snapshot(FOUR_NODE_SNAPSHOT))
        expected = ags.canonicalize(
            state(
                element(
                    node_attrs(lang="en", type="html", path="/html[1]"),
                    [
                        element(node_attrs(type="head", path="/html[1]/head[1]")),
                        element(
                            node_attrs(type="body", path="/html[1]/body[1]"),
                            [
                                element(
                                    node_attrs(
                                        name="foo",
                                        text="bar",
                                        type="button",
                                        path="/html[1]/body[1]/button[1]",
                                    )
                                )
                            ],
                        ),
                    ],
                )
            )
        )
        assert out == expected

    def test_default_valued_css_attribute_is_dropped(self):
        data = snap(
            {"path": "/a[1]", "css": {"position": "static", "color": "red"}},
        )
        (root,) = construct_ags(parse_snapshot(data)).roots
        attrs = root.attribute_map()
        assert "position" not in attrs
        assert attrs["color"] == "red"

    def test_non_default_value_of_a_defaulted_key_is_kept(self):
        data = snap({"path": "/a[1]", "css": {"position": "absolute"}})
        (root,) = construct_ags(parse_snapshot(data)).roots
        assert root.get("position") == "absolute"

    def test_css_wins_over_html_on_shared_keys(self):
        data = snap({"path": "/a[1]", "html": {"color": "red"}, "css": {"color": "blue"}})
        (root,) = construct_ags(parse_snapshot(data)).roots
        assert root.get("color") == "blue"

    def test_derived_attributes_win_over_declared_ones(self):
        data = snap(
            {
                "path": "/em[1]",
                "html": {"path": "spoof", "type": "spoof", "width": "999"},
                "rect": {"w": 10},
            }
        )
        (root,) = construct_ags(parse_snapshot(data)).roots
        assert root.get("path") == "/em[1]"
        assert root.get("type") == "em"
        assert root.get("width") == "10"

    def test_text_only_present_when_provided(self):
        data = snap({"path": "/a[1]", "text": ""}, {"path": "/b[1]"})
        first, second = construct_ags(parse_snapshot(data)).roots
        assert first.get("text") == ""
        assert second.get("text") is None

    def test_siblings_ordered_by_xpath_index_not_input_order(self):
        data = snap(
            {"path": "/ul[1]"},
            {"path": "/ul[1]/li[3]"},
            {"path": "/ul[1]/li[1]"},
            {"path": "/ul[1]/li[2]"},
        )
        (root,) = construct_ags(parse_snapshot(data)).roots
        assert [c.get("path") for c in root.children] == [
            "/ul[1]/li[1]",
            "/ul[1]/li[2]",
            "/ul[1]/li[3]",
        ]

    def test_equal_indices_of_different_tags_keep_input_order(self):
        forward = snap({"path": "/html[1]"}, {"path": "/html[1]/head[1]"}, {"path": "/html[1]/body[1]"})
        backward = snap({"path": "/html[1]"}, {"path": "/html[1]/body[1]"}, {"path": "/html[1]/head[1]"})
        (f_root,) = construct_ags(parse_snapshot(forward)).roots
        (b_root,) = construct_ags(parse_snapshot(backward)).roots
        assert [c.get("type") for c in f_root.children] == ["head", "body"]
        assert [c.get("type") for c in b_root.children] == ["body", "head"]

    def test_orphan_attaches_to_nearest_present_ancestor(self):
        data = snap({"path": "/html[1]"}, {"path": "/html[1]/body[1]/div[1]"})
        with pytest.warns(OrphanWarning, match="parent path '/html\\[1\\]/body\\[1\\]' missing"):
            out = construct_ags(parse_snapshot(data))
        (root,) = out.roots
        assert [c.get("path") for c in root.children] == ["/html[1]/body[1]/div[1]"]

    def test_orphan_without_any_ancestor_becomes_root(self):
        data = snap({"path": "/a[1]/b[1]"})
        with pytest.warns(OrphanWarning):
            out = construct_ags(parse_snapshot(data))
        assert [r.get("path") for r in out.roots] == ["/a[1]/b[1]"]

    def test_depth_one_nodes_are_roots_without_warning(self):
        with warnings_as_errors():
            out = construct_ags(parse_snapshot(snap({"path": "/a[1]"}, {"path": "/b[1]"})))
        assert len(out.roots) == 2

    def test_element_count_equals_node_count(self):
        rng = random.Random(89)
        for _ in range(30):
            paths = random_path_set(rng)
            nodes = [{"path": p} for p in paths]
            rng.shuffle(nodes)
            with suppress_orphan_warnings():
                out = construct_ags(parse_snapshot(snap(*nodes)))
            assert ags.node_count(out) == len(paths)

    def test_structure_matches_prefix_tree_oracle(self):
        rng = random.Random(97)
        for _ in range(30):
            paths = random_path_set(rng)
            nodes = [{"path": p} for p in paths]
            rng.shuffle(nodes)
            with suppress_orphan_warnings():
                out = construct_ags(parse_snapshot(snap(*nodes)))
            assert build_parent_map(out) == prefix_tree_oracle(paths)

    def test_determinism_same_bytes_same_serialization(self):
        first = ags.serialize(construct_ags(parse_snapshot(FOUR_NODE_SNAPSHOT)))
        second = ags.serialize(construct_ags(parse_snapshot(FOUR_NODE_SNAPSHOT)))
        assert first == second

    def test_same_tag_sibling_order_survives_input_shuffling(self):
        rng = random.Random(101)
        base = [{"path": "/ul[1]"}] + [{"path": f"/ul[1]/li[{i}]"} for i in range(1, 9)]
        reference = ags.serialize(construct_ags(parse_snapshot(snap(*base))))
        for _ in range(10):
            shuffled = list(base)
            rng.shuffle(shuffled)
            assert ags.serialize(construct_ags(parse_snapshot(snap(*shuffled)))) == reference


class TestFiles:
    def test_load_snapshot_state(self, tmp_path):
        path = tmp_path / "page.snap.json"
        path.write_bytes(FOUR_NODE_SNAPSHOT)
        out = load_snapshot_state(path)
        assert ags.node_count(out) == 4

    def test_load_defaults(self, tmp_path):
        path = tmp_path / "defaults.json"
        path.write_text(json.dumps({"display": ["inline", "block"], "color": []}))
        table = load_defaults(path)
        assert table == {"display": frozenset({"inline", "block"}), "color": frozenset()}

    def test_load_defaults_rejects_bad_shapes(self, tmp_path):
        for doc in ("[]", '{"": ["x"]}', '{"k": "x"}', '{"k": [1]}'):
            path = tmp_path / "bad.json"
            path.write_text(doc)
            with pytest.raises(SnapshotParseError):
                load_defaults(path)

    def test_custom_defaults_applied(self, tmp_path):
        path = tmp_path / "defaults.json"
        path.write_text(json.dumps({"display": ["block"]}))
        table = load_defaults(path)
        data = snap({"path": "/div[1]", "css": {"display": "block", "color": "red"}})
        (root,) = construct_ags(parse_snapshot(data), table).roots
        assert root.get("display") is None
        assert root.get("color") == "red"
        # builtin table knows nothing about display
        (root2,) = construct_ags(parse_snapshot(data), BUILTIN_DEFAULTS).roots
        assert root2.get("display") == "block"


# ---- helpers ----


@contextlib.contextmanager
def warnings_as_errors():
    with _warnings.catch_warnings():
        _warnings.simplefilter("error")
        yield


@contextlib.contextmanager
def suppress_orphan_warnings():
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", OrphanWarning)
        yield


def random_path_set(rng: random.Random) -> list[str]:
    """A messy path population: gaps in indices, missing intermediate nodes."""
    tags = ["div", "span", "p"]
    paths = {f"/{rng.choice(tags)}[1]"}
    for _ in range(rng.randint(1, 25)):
        base = rng.choice(sorted(paths))
        if base.count("/") >= 5:
            continue
        child = f"{base}/{rng.choice(tags)}[{rng.randint(1, 4)}]"
        paths.add(child)
    # Punch holes so some nodes are orphans.
    victims = [p for p in paths if p.count("/") > 1]
    rng.shuffle(victims)
    for victim in victims[: len(victims) // 4]:
        if any(q != victim and q.startswith(victim) for q in paths):
            continue
        paths.discard(victim)
    return sorted(paths)


def prefix_tree_oracle(paths: list[str]) -> dict[str, str | None]:
    """Expected parent of each path: longest proper prefix present in the set."""
    present = set(paths)
    out: dict[str, str | None] = {}
    for path in paths:
        probe = parent_path(path)
        while probe is not None and probe not in present:
            probe = parent_path(probe)
        out[path] = probe
    return out


def build_parent_map(state_value: ags.GuiState) -> dict[str, str | None]:
    out: dict[str, str | None] = {}

    def walk(elem: ags.Element, parent: str | None):
        path = elem.get("path")
        out[path] = parent
        for child in elem.children:
            walk(child, path)

    for root in state_value.roots:
        walk(root, None)
    return out
