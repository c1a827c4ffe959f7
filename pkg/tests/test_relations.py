from __future__ import annotations

import itertools
import random

import pytest

from agsdiff import relations
from agsdiff.ags import element, state
from agsdiff.errors import WellFormednessViolation
from agsdiff.filters import parse_rules
from agsdiff.relations import (
    ProofKind,
    derive_element_inequality,
    derive_equality,
    derive_inequality,
    iter_leaves,
)

from helpers import LOG_IN, LOGO, SIGN_IN, mutate_state, random_state


def leaf_facts(proof):
    """Leaves as comparable tuples: (kind, key, expected, actual)."""
    return {
        (leaf.kind, leaf.key, leaf.expected_value, leaf.actual_value)
        for leaf in iter_leaves(proof)
    }


SIGN_IN_LEAVES = {
    (ProofKind.VALUE_DIFF, "background-color", "#047bf8", "#292b2c"),
    (ProofKind.VALUE_DIFF, "text", "Sign in", "Log in"),
    (ProofKind.VALUE_DIFF, "type", "a", "button"),
    (ProofKind.ONLY_EXPECTED, "href", "/app.html", None),
    (ProofKind.ONLY_ACTUAL, "onclick", None, "login()"),
}


class TestEquality:
    def test_empty_states_equal(self):
        assert derive_equality(state(), state())

    def test_attribute_order_is_irrelevant(self):
        a = state(element([("a", "1"), ("b", "2")]))
        b = state(element([("b", "2"), ("a", "1")]))
        assert derive_equality(a, b)

    def test_value_difference_breaks_equality(self):
        assert not derive_equality(state(SIGN_IN), state(LOG_IN))

    def test_root_count_mismatch_breaks_equality(self):
        assert not derive_equality(state(SIGN_IN), state(SIGN_IN, LOGO))

    def test_child_order_matters(self):
        a = state(element({}, [SIGN_IN, LOGO]))
        b = state(element({}, [LOGO, SIGN_IN]))
        assert not derive_equality(a, b)

    def test_rejects_ill_formed(self):
        with pytest.raises(WellFormednessViolation):
            derive_equality(state(element([("k", "1"), ("k", "2")])), state())


class TestElementInequality:
    def test_reflexive_none(self):
        assert derive_element_inequality(SIGN_IN, SIGN_IN) is None

    def test_sign_in_pair_yields_exactly_the_five_leaves(self):
        proof = derive_element_inequality(SIGN_IN, LOG_IN)
        assert leaf_facts(proof) == SIGN_IN_LEAVES

    def test_leaves_match_set_algebra_oracle_on_flat_elements(self):
        rng = random.Random(23)
        keys = ["a", "b", "c", "d", "e"]
        for _ in range(300):
            left = {k: rng.choice("xyz") for k in keys if rng.random() < 0.6}
            right = {k: rng.choice("xyz") for k in keys if rng.random() < 0.6}
            proof = derive_element_inequality(element(left), element(right))
            expected = set()
            for k in set(left) & set(right):
                if left[k] != right[k]:
                    expected.add((ProofKind.VALUE_DIFF, k, left[k], right[k]))
            for k in set(left) - set(right):
                expected.add((ProofKind.ONLY_EXPECTED, k, left[k], None))
            for k in set(right) - set(left):
                expected.add((ProofKind.ONLY_ACTUAL, k, None, right[k]))
            assert (set() if proof is None else leaf_facts(proof)) == expected

    def test_child_difference_located_by_index(self):
        left = element({}, [LOGO, SIGN_IN])
        right = element({}, [LOGO, LOG_IN])
        proof = derive_element_inequality(left, right)
        assert proof.kind is ProofKind.CHILD_INEQUAL and proof.index is None
        (inner,) = proof.children
        assert inner.kind is ProofKind.CHILD_INEQUAL
        assert inner.index == 1
        assert leaf_facts(inner) == SIGN_IN_LEAVES


class TestStateInequality:
    def test_equal_states_have_no_proof(self):
        assert derive_inequality(state(SIGN_IN), state(SIGN_IN)) is None

    def test_sign_in_page_proof(self):
        proof = derive_inequality(state(SIGN_IN), state(LOG_IN))
        assert leaf_facts(proof) == SIGN_IN_LEAVES

    def test_length_mismatch_leaf_carries_both_lengths(self):
        proof = derive_inequality(state(SIGN_IN), state(SIGN_IN, LOGO))
        facts = leaf_facts(proof)
        assert facts == {(ProofKind.LIST_LENGTH_MISMATCH, None, "1", "2")}

    def test_extra_child_and_value_diff_both_reported(self):
        left = state(element({}, [SIGN_IN]))
        right = state(element({}, [LOG_IN, LOGO]))
        facts = leaf_facts(derive_inequality(left, right))
        assert (ProofKind.LIST_LENGTH_MISMATCH, None, "1", "2") in facts
        assert (ProofKind.VALUE_DIFF, "type", "a", "button") in facts


class TestSoundness:
    def test_exactly_one_relation_holds(self):
        rng = random.Random(31)
        checked = 0
        while checked < 1000:
            base = random_state(rng)
            kind = rng.random()
            if kind < 0.3:
                other = base
            elif kind < 0.7:
                other = mutate_state(rng, base)
            else:
                other = random_state(rng)
            equal = derive_equality(base, other)
            proof = derive_inequality(base, other)
            assert equal == (proof is None)
            checked += 1

    def test_proof_positions_replay_to_a_real_difference(self):
        # Follow every child-index chain down both trees; the leaf evidence
        # must hold at the reached pair of elements.
        rng = random.Random(37)
        for _ in range(200):
            left = random_state(rng)
            right = mutate_state(rng, left)
            proof = derive_inequality(left, right)
            if proof is None:
                continue
            _check_node(list(left.roots), list(right.roots), proof)


def _check_node(left_children, right_children, node):
    for child in node.children:
        if child.kind is ProofKind.CHILD_INEQUAL:
            l = left_children[child.index]
            r = right_children[child.index]
            _check_pair(l, r, child)
        elif child.kind is ProofKind.LIST_LENGTH_MISMATCH:
            assert len(left_children) == int(child.expected_value)
            assert len(right_children) == int(child.actual_value)


def _check_pair(left, right, node):
    lmap, rmap = left.attribute_map(), right.attribute_map()
    for child in node.children:
        if child.kind is ProofKind.VALUE_DIFF:
            assert lmap[child.key] == child.expected_value
            assert rmap[child.key] == child.actual_value
            assert child.expected_value != child.actual_value
        elif child.kind is ProofKind.ONLY_EXPECTED:
            assert child.key in lmap and child.key not in rmap
        elif child.kind is ProofKind.ONLY_ACTUAL:
            assert child.key in rmap and child.key not in lmap
        elif child.kind is ProofKind.CHILD_INEQUAL:
            _check_pair(left.children[child.index], right.children[child.index], child)
        elif child.kind is ProofKind.LIST_LENGTH_MISMATCH:
            assert len(left.children) == int(child.expected_value)
            assert len(right.children) == int(child.actual_value)


class TestSuppression:
    def test_fully_suppressed_proof_collapses_to_none(self):
        rules = parse_rules("pixel-diff: 25")
        left = state(element({"x": "100", "id": "a"}))
        right = state(element({"x": "120", "id": "a"}))
        assert derive_inequality(left, right, rules) is None

    def test_partial_suppression_keeps_other_leaves(self):
        rules = parse_rules("pixel-diff: 25")
        left = state(element({"x": "100", "text": "one"}))
        right = state(element({"x": "120", "text": "two"}))
        facts = leaf_facts(derive_inequality(left, right, rules))
        assert facts == {(ProofKind.VALUE_DIFF, "text", "one", "two")}

    def test_suppression_never_applies_beyond_threshold(self):
        rules = parse_rules("pixel-diff: 25")
        left = state(element({"x": "100"}))
        right = state(element({"x": "126"}))
        facts = leaf_facts(derive_inequality(left, right, rules))
        assert facts == {(ProofKind.VALUE_DIFF, "x", "100", "126")}


def test_attribute_order_never_changes_proofs():
    pairs = [("a", "1"), ("b", "2"), ("c", "3")]
    target = element({"a": "9", "d": "4"})
    expected_facts = None
    for perm in itertools.permutations(pairs):
        proof = derive_element_inequality(element(perm), target)
        facts = leaf_facts(proof)
        if expected_facts is None:
            expected_facts = facts
        assert facts == expected_facts
