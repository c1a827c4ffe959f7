"""Diagnostic equality and inequality between GUI states.

Equality is positional: two states are equal when their root lists have
the same length and elements at matching positions carry equal attribute
sets (compared as sets, order-free) and pairwise-equal child lists.

Inequality produces a proof tree instead of a bare boolean.  Leaves name
the concrete evidence: a value difference on a shared key, a key present
on only one side, or a child-list length mismatch.  Inner nodes locate
that evidence by child position.  The root node of a returned proof is a
``child-inequal-at-index`` node with no index; it stands for the compared
pair itself.

For well-formed inputs and no suppression rules, exactly one of
``derive_equality(a, b)`` and ``derive_inequality(a, b) is not None``
holds.  Pixel-diff suppression removes individual value-diff leaves and
a proof whose evidence is entirely suppressed collapses to ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

from .ags import Element, GuiState, ensure_well_formed
from .filters import EMPTY_RULES, FilterRuleSet, suppress_difference


class ProofKind(Enum):
    LIST_LENGTH_MISMATCH = "list-length-mismatch"
    CHILD_INEQUAL = "child-inequal-at-index"
    VALUE_DIFF = "attribute-value-diff"
    ONLY_EXPECTED = "attribute-only-expected"
    ONLY_ACTUAL = "attribute-only-actual"


@dataclass(frozen=True, slots=True)
class InequalityProof:
    kind: ProofKind
    index: int | None = None
    key: str | None = None
    expected_value: str | None = None
    actual_value: str | None = None
    children: tuple["InequalityProof", ...] = ()


def iter_leaves(proof: InequalityProof) -> Iterator[InequalityProof]:
    """All evidence leaves of a proof, left to right."""
    if proof.kind is ProofKind.CHILD_INEQUAL:
        for child in proof.children:
            yield from iter_leaves(child)
    else:
        yield proof


def derive_equality(expected: GuiState, actual: GuiState) -> bool:
    """Order-free attribute equality plus positional child-list equality."""
    ensure_well_formed(expected)
    ensure_well_formed(actual)
    return _lists_equal(expected.roots, actual.roots)


def _lists_equal(expected: Sequence[Element], actual: Sequence[Element]) -> bool:
    if len(expected) != len(actual):
        return False
    return all(_elements_equal(e, a) for e, a in zip(expected, actual))


def _elements_equal(expected: Element, actual: Element) -> bool:
    if _attr_set(expected) != _attr_set(actual):
        return False
    return _lists_equal(expected.children, actual.children)


def _attr_set(elem: Element) -> frozenset[tuple[str, str]]:
    return frozenset((a.key, a.value) for a in elem.attributes)


def derive_inequality(
    expected: GuiState,
    actual: GuiState,
    rules: FilterRuleSet = EMPTY_RULES,
) -> InequalityProof | None:
    """Proof that two states differ, or ``None`` when no evidence remains."""
    ensure_well_formed(expected)
    ensure_well_formed(actual)
    items = _list_diff_nodes(expected.roots, actual.roots, rules)
    if not items:
        return None
    return InequalityProof(ProofKind.CHILD_INEQUAL, children=tuple(items))


def derive_element_inequality(
    expected: Element,
    actual: Element,
    rules: FilterRuleSet = EMPTY_RULES,
) -> InequalityProof | None:
    """Proof that two elements differ, or ``None``."""
    ensure_well_formed(expected)
    ensure_well_formed(actual)
    items = _element_diff_nodes(expected, actual, rules)
    if not items:
        return None
    return InequalityProof(ProofKind.CHILD_INEQUAL, children=tuple(items))


def _element_diff_nodes(
    expected: Element, actual: Element, rules: FilterRuleSet
) -> list[InequalityProof]:
    expected_map = expected.attribute_map()
    actual_map = actual.attribute_map()
    nodes: list[InequalityProof] = []
    for key in sorted(expected_map.keys() | actual_map.keys()):
        in_expected = key in expected_map
        in_actual = key in actual_map
        if in_expected and in_actual:
            left, right = expected_map[key], actual_map[key]
            if left != right and not suppress_difference(key, left, right, rules):
                nodes.append(
                    InequalityProof(
                        ProofKind.VALUE_DIFF, key=key, expected_value=left, actual_value=right
                    )
                )
        elif in_expected:
            nodes.append(
                InequalityProof(
                    ProofKind.ONLY_EXPECTED, key=key, expected_value=expected_map[key]
                )
            )
        else:
            nodes.append(
                InequalityProof(ProofKind.ONLY_ACTUAL, key=key, actual_value=actual_map[key])
            )
    nodes.extend(_list_diff_nodes(expected.children, actual.children, rules))
    return nodes


def _list_diff_nodes(
    expected: Sequence[Element], actual: Sequence[Element], rules: FilterRuleSet
) -> list[InequalityProof]:
    nodes: list[InequalityProof] = []
    for index, (e, a) in enumerate(zip(expected, actual)):
        sub = _element_diff_nodes(e, a, rules)
        if sub:
            nodes.append(
                InequalityProof(ProofKind.CHILD_INEQUAL, index=index, children=tuple(sub))
            )
    if len(expected) != len(actual):
        nodes.append(
            InequalityProof(
                ProofKind.LIST_LENGTH_MISMATCH,
                expected_value=str(len(expected)),
                actual_value=str(len(actual)),
            )
        )
    return nodes
