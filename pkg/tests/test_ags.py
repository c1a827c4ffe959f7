from __future__ import annotations

import itertools
import json
import random

import pytest
from hypothesis import given, strategies as st

from agsdiff import ags
from agsdiff.ags import Attribute, Element, GuiState, element, state
from agsdiff.errors import ParseError, WellFormednessViolation

from helpers import (
    SIGN_IN,
    count_nodes_oracle,
    normalized,
    random_state,
    states_equal_oracle,
)


class TestModel:
    def test_attribute_rejects_empty_key(self):
        with pytest.raises(ValueError):
            Attribute("", "x")

    def test_attribute_rejects_non_strings(self):
        with pytest.raises(TypeError):
            Attribute("k", 5)

    def test_get_returns_first_value(self):
        elem = element([("k", "1"), ("k", "2")])
        assert elem.get("k") == "1"
        assert elem.get("missing") is None

    def test_node_count_matches_recursive_oracle(self):
        rng = random.Random(7)
        for _ in range(50):
            s = random_state(rng)
            assert ags.node_count(s) == count_nodes_oracle(s)

    def test_iter_elements_preorder(self):
        a = element({"id": "a"}, [element({"id": "b"}), element({"id": "c"})])
        d = element({"id": "d"})
        order = [e.get("id") for e in ags.iter_elements(state(a, d))]
        assert order == ["a", "b", "c", "d"]

    def test_element_handle_prefers_path(self):
        with_path = element({"path": "/html[1]"})
        without = element({"id": "x"})
        handles = [h for h, _ in ags.iter_with_handles(state(with_path, without))]
        assert handles == ["/html[1]", "#1"]


class TestWellFormedness:
    def test_duplicate_key_on_one_element_is_ill_formed(self):
        s = state(element([("k", "x"), ("k", "y")]))
        assert not ags.is_well_formed(s)
        with pytest.raises(WellFormednessViolation):
            ags.ensure_well_formed(s)

    def test_same_key_on_nested_elements_is_fine(self):
        s = state(element({"k": "x"}, [element({"k": "y"})]))
        assert ags.is_well_formed(s)

    def test_empty_state_is_well_formed(self):
        assert ags.is_well_formed(state())

    def test_duplicate_in_deep_child_detected(self):
        bad = element({}, [element({}, [element([("z", "1"), ("z", "2")])])])
        assert not ags.is_well_formed(state(bad))


class TestCanonicalize:
    def test_sorts_attributes_by_key(self):
        s = state(element([("b", "2"), ("a", "1"), ("c", "3")]))
        out = ags.canonicalize(s)
        assert [a.key for a in out.roots[0].attributes] == ["a", "b", "c"]

    def test_all_permutations_share_one_canonical_form(self):
        pairs = [("id", "login"), ("text", "Sign in"), ("type", "a"), ("href", "/app")]
        forms = {
            ags.canonicalize(state(element(perm)))
            for perm in itertools.permutations(pairs)
        }
        assert len(forms) == 1

    def test_idempotent_on_random_states(self):
        rng = random.Random(11)
        for _ in range(100):
            s = random_state(rng)
            once = ags.canonicalize(s)
            assert ags.canonicalize(once) == once

    def test_preserves_structure(self):
        rng = random.Random(13)
        for _ in range(100):
            s = random_state(rng)
            assert states_equal_oracle(s, ags.canonicalize(s))

    def test_rejects_ill_formed(self):
        with pytest.raises(WellFormednessViolation):
            ags.canonicalize(state(element([("k", "1"), ("k", "2")])))

    def test_sorts_children_attribute_sets_recursively(self):
        s = state(element({}, [element([("z", "1"), ("a", "2")])]))
        child = ags.canonicalize(s).roots[0].children[0]
        assert [a.key for a in child.attributes] == ["a", "z"]


class TestSerialization:
    def test_round_trip_empty(self):
        assert ags.deserialize(ags.serialize(state())) == state()

    def test_round_trip_sign_in_element(self):
        s = state(SIGN_IN)
        assert ags.deserialize(ags.serialize(s)) == ags.canonicalize(s)

    def test_round_trip_random_states(self):
        rng = random.Random(17)
        for _ in range(1000):
            s = random_state(rng, max_depth=4, max_nodes=12)
            again = ags.deserialize(ags.serialize(s))
            assert states_equal_oracle(s, again)
            assert again == ags.canonicalize(s)

    def test_serialized_keys_are_sorted(self):
        raw = ags.serialize(state(element([("z", "1"), ("a", "2"), ("m", "3")])))
        doc = json.loads(raw.decode("utf-8"))
        keys = list(doc["roots"][0]["attributes"])
        assert keys == sorted(keys)

    def test_serialize_is_utf8_json(self):
        raw = ags.serialize(state(element({"text": "héllo ✓"})))
        assert json.loads(raw.decode("utf-8"))["roots"][0]["attributes"]["text"] == "héllo ✓"

    def test_serialize_rejects_ill_formed(self):
        with pytest.raises(WellFormednessViolation):
            ags.serialize(state(element([("k", "1"), ("k", "2")])))

    def test_malformed_json_reports_position(self):
        with pytest.raises(ParseError) as err:
            ags.deserialize('{"roots": [}')
        assert err.value.line == 1
        assert err.value.column is not None

    def test_duplicate_attribute_key_raises_well_formedness(self):
        text = '{"roots": [{"attributes": {"k": "1", "k": "2"}, "children": []}]}'
        with pytest.raises(WellFormednessViolation):
            ags.deserialize(text)

    def test_duplicate_structural_key_is_a_parse_error(self):
        text = '{"roots": [{"attributes": {}, "attributes": {}, "children": []}]}'
        with pytest.raises(ParseError):
            ags.deserialize(text)

    def test_unknown_element_key_is_a_parse_error(self):
        text = '{"roots": [{"attributes": {}, "children": [], "extra": 1}]}'
        with pytest.raises(ParseError):
            ags.deserialize(text)

    def test_non_string_attribute_value_is_a_parse_error(self):
        text = '{"roots": [{"attributes": {"x": 5}, "children": []}]}'
        with pytest.raises(ParseError):
            ags.deserialize(text)

    def test_missing_fields_default_to_empty(self):
        assert ags.deserialize('{"roots": [{}]}') == state(element())

    def test_file_round_trip(self, tmp_path):
        target = tmp_path / ("login" + ags.AGS_SUFFIX)
        ags.save_state(target, state(SIGN_IN))
        assert ags.load_state(target) == ags.canonicalize(state(SIGN_IN))


@given(st.lists(st.tuples(st.text(min_size=1, max_size=6), st.text(max_size=6)), max_size=8))
def test_canonicalize_only_reorders_attribute_pairs(pairs):
    keys = [k for k, _ in pairs]
    s = state(element(pairs))
    if len(set(keys)) != len(keys):
        with pytest.raises(WellFormednessViolation):
            ags.canonicalize(s)
    else:
        out = ags.canonicalize(s)
        assert normalized(out) == normalized(s)
        assert [a.key for a in out.roots[0].attributes] == sorted(keys)
