"""GUI element identification: who is who across two states.

Both states are flattened to element lists in pre-order.  A strategy then
splits them into deleted (only in the expected state), created (only in
the actual state) and maintained (paired) elements:

``strong-weak``
    Pair when the key/value projections onto the strong keys are equal
    as sets and the same weak keys are present on both sides.

``key-tests``
    Like ``strong-weak`` but each strong key present on both sides only
    needs Jaro-Winkler similarity of its values >= ``t``.  A strong key
    present on exactly one side fails the pair.

``matching``
    Score every pair by the fraction of configured keys both elements
    carry with equal values; pairs scoring >= ``u`` are assigned greedily,
    best score first, ties broken by expected path then actual path.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .ags import Element, GuiState, element_handle, ensure_well_formed, iter_elements
from .errors import EmptyKeyConfig

DEFAULT_STRONG_KEYS = frozenset({"id", "path"})
DEFAULT_WEAK_KEYS = frozenset({"type", "x", "y", "width", "height"})
DEFAULT_MATCHING_EXTRA_KEYS = frozenset({"class", "id", "name", "text"})


class Strategy(Enum):
    STRONG_WEAK = "strong-weak"
    KEY_TESTS = "key-tests"
    MATCHING = "matching"


@dataclass(frozen=True)
class KeyConfig:
    """Key roles and thresholds used by the identification strategies.

    Strong keys identify an element on their own (an id, a path).  Weak
    keys only count by presence.  The extra keys additionally take part
    in ``matching`` scores.  ``t`` is the key-test similarity threshold,
    ``u`` the minimum match score.
    """

    strong_keys: frozenset[str] = DEFAULT_STRONG_KEYS
    weak_keys: frozenset[str] = DEFAULT_WEAK_KEYS
    matching_extra_keys: frozenset[str] = DEFAULT_MATCHING_EXTRA_KEYS
    t: float = 0.9
    u: float = 0.3

    def __post_init__(self) -> None:
        object.__setattr__(self, "strong_keys", frozenset(self.strong_keys))
        object.__setattr__(self, "weak_keys", frozenset(self.weak_keys))
        object.__setattr__(self, "matching_extra_keys", frozenset(self.matching_extra_keys))
        if self.strong_keys & self.weak_keys:
            raise ValueError("strong and weak key sets must be disjoint")
        if not 0.0 <= self.t <= 1.0 or not 0.0 <= self.u <= 1.0:
            raise ValueError("thresholds t and u must lie in [0, 1]")

    @property
    def scored_keys(self) -> tuple[str, ...]:
        """Keys entering a match score, sorted for determinism."""
        return tuple(sorted(self.strong_keys | self.weak_keys | self.matching_extra_keys))


DEFAULT_CONFIG = KeyConfig()


@dataclass(frozen=True, slots=True)
class ExtractedElement:
    """A flattened element: attributes only, children dropped.

    ``origin_path`` is the element's path attribute when present, else a
    positional fallback that is stable within its state.
    """

    attributes: dict[str, str]
    origin_path: str
    order: int

    def get(self, key: str) -> str | None:
        return self.attributes.get(key)


@dataclass(frozen=True, slots=True)
class IdentificationResult:
    deleted: tuple[ExtractedElement, ...]
    created: tuple[ExtractedElement, ...]
    maintained: tuple[tuple[ExtractedElement, ExtractedElement], ...]


def extract(state: GuiState) -> list[ExtractedElement]:
    """Flatten a well-formed state to its elements in pre-order."""
    ensure_well_formed(state)
    out: list[ExtractedElement] = []
    for index, elem in enumerate(iter_elements(state)):
        out.append(ExtractedElement(elem.attribute_map(), element_handle(elem, index), index))
    return out


# ---- string similarity ----


def jaro_winkler(a: str, b: str) -> float:
    """Jaro similarity with the Winkler common-prefix boost.

    Match window is ``max(len) // 2 - 1``; transpositions are half the
    out-of-order matched pairs; the boost rewards a shared prefix of up
    to four characters at scale 0.1.  Two empty strings score 1.0, one
    empty string scores 0.0.
    """
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    jaro = _jaro(a, b)
    prefix = 0
    for x, y in zip(a, b):
        if x != y:
            break
        prefix += 1
        if prefix == 4:
            break
    return jaro + prefix * 0.1 * (1.0 - jaro)


def _jaro(a: str, b: str) -> float:
    len_a, len_b = len(a), len(b)
    window = max(len_a, len_b) // 2 - 1
    a_matched = [False] * len_a
    b_matched = [False] * len_b
    matches = 0
    for i in range(len_a):
        start = max(0, i - window)
        end = min(i + window + 1, len_b)
        for j in range(start, end):
            if not b_matched[j] and a[i] == b[j]:
                a_matched[i] = True
                b_matched[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    j = 0
    for i in range(len_a):
        if a_matched[i]:
            while not b_matched[j]:
                j += 1
            if a[i] != b[j]:
                transpositions += 1
            j += 1
    transpositions //= 2
    return (matches / len_a + matches / len_b + (matches - transpositions) / matches) / 3.0


def _jw_at_least(a: str, b: str, t: float) -> bool:
    """Exact ``jaro_winkler(a, b) >= t`` with cheap sound rejections first."""
    if a == b:
        return True
    if not a or not b:
        return 0.0 >= t
    if t > 0.4:
        # jw <= 0.4 + 0.6 * jaro and jaro <= (2 + min/max) / 3
        shorter, longer = sorted((len(a), len(b)))
        if (2.0 + shorter / longer) / 3.0 < (t - 0.4) / 0.6:
            return False
    return jaro_winkler(a, b) >= t


# ---- pairwise relations ----


def _attrs_of(e: object) -> Mapping[str, str]:
    if isinstance(e, ExtractedElement):
        return e.attributes
    if isinstance(e, Element):
        return e.attribute_map()
    if isinstance(e, Mapping):
        return e
    raise TypeError(f"expected an element, got {type(e).__name__}")


def fairly_similar_strong_weak(e1: object, e2: object, config: KeyConfig = DEFAULT_CONFIG) -> bool:
    """Equal strong key/value projections and equal weak key presence."""
    a1, a2 = _attrs_of(e1), _attrs_of(e2)
    strong1 = {(k, a1[k]) for k in config.strong_keys if k in a1}
    strong2 = {(k, a2[k]) for k in config.strong_keys if k in a2}
    if strong1 != strong2:
        return False
    return _weak_presence(a1, config) == _weak_presence(a2, config)


def fairly_similar_key_tests(e1: object, e2: object, config: KeyConfig = DEFAULT_CONFIG) -> bool:
    """Per-key similarity tests on strong keys, weak keys by presence.

    Every strong key present on both sides must pass the Jaro-Winkler
    threshold ``t``; a strong key present on exactly one side fails.
    """
    a1, a2 = _attrs_of(e1), _attrs_of(e2)
    for key in config.strong_keys:
        present1, present2 = key in a1, key in a2
        if present1 != present2:
            return False
        if present1 and not _jw_at_least(a1[key], a2[key], config.t):
            return False
    return _weak_presence(a1, config) == _weak_presence(a2, config)


def _weak_presence(attrs: Mapping[str, str], config: KeyConfig) -> frozenset[str]:
    return frozenset(k for k in config.weak_keys if k in attrs)


def match_score(e1: object, e2: object, config: KeyConfig = DEFAULT_CONFIG) -> float:
    """Fraction of configured keys both elements carry with equal values.

    The denominator is the full configured key set (strong, weak and
    extra keys), independent of what the two elements actually carry.
    """
    keys = config.scored_keys
    if not keys:
        raise EmptyKeyConfig("match scoring needs at least one configured key")
    a1, a2 = _attrs_of(e1), _attrs_of(e2)
    hits = 0
    for key in keys:
        v1 = a1.get(key)
        if v1 is not None and v1 == a2.get(key):
            hits += 1
    return hits / len(keys)


def fairly_similar_matching(e1: object, e2: object, config: KeyConfig = DEFAULT_CONFIG) -> bool:
    return match_score(e1, e2, config) >= config.u


# ---- identification ----


def identify(
    expected: GuiState,
    actual: GuiState,
    strategy: Strategy | str = Strategy.MATCHING,
    config: KeyConfig = DEFAULT_CONFIG,
) -> IdentificationResult:
    """Partition the elements of two states into deleted/created/maintained.

    The result is deterministic: element lists keep extraction order and
    all tie-breaking is by explicit sort keys, never by hash order.
    """
    strategy = Strategy(strategy)
    exp = extract(expected)
    act = extract(actual)
    if strategy is Strategy.MATCHING:
        pairs = _assign_matching(exp, act, config)
    elif strategy is Strategy.STRONG_WEAK:
        pairs = _assign_strong_weak(exp, act, config)
    else:
        pairs = _assign_key_tests(exp, act, config)

    paired_exp = {i for i, _ in pairs}
    paired_act = {j for _, j in pairs}
    return IdentificationResult(
        deleted=tuple(e for i, e in enumerate(exp) if i not in paired_exp),
        created=tuple(a for j, a in enumerate(act) if j not in paired_act),
        maintained=tuple((exp[i], act[j]) for i, j in sorted(pairs)),
    )


def _assign_strong_weak(
    exp: Sequence[ExtractedElement], act: Sequence[ExtractedElement], config: KeyConfig
) -> list[tuple[int, int]]:
    # The relation only holds between elements with identical strong
    # projections and weak presence, so first-match pairing reduces to
    # zipping per-signature queues in extraction order.
    def signature(e: ExtractedElement) -> tuple:
        attrs = e.attributes
        strong = tuple(sorted((k, attrs[k]) for k in config.strong_keys if k in attrs))
        weak = tuple(sorted(k for k in config.weak_keys if k in attrs))
        return strong, weak

    queues: dict[tuple, deque[int]] = defaultdict(deque)
    for j, a in enumerate(act):
        queues[signature(a)].append(j)
    pairs: list[tuple[int, int]] = []
    for i, e in enumerate(exp):
        queue = queues.get(signature(e))
        if queue:
            pairs.append((i, queue.popleft()))
    return pairs


def _assign_key_tests(
    exp: Sequence[ExtractedElement], act: Sequence[ExtractedElement], config: KeyConfig
) -> list[tuple[int, int]]:
    # First unmatched actual (in extraction order) passing the relation.
    taken = [False] * len(act)
    pairs: list[tuple[int, int]] = []
    for i, e in enumerate(exp):
        for j, a in enumerate(act):
            if not taken[j] and fairly_similar_key_tests(e, a, config):
                taken[j] = True
                pairs.append((i, j))
                break
    return pairs


def _assign_matching(
    exp: Sequence[ExtractedElement], act: Sequence[ExtractedElement], config: KeyConfig
) -> list[tuple[int, int]]:
    keys = config.scored_keys
    if not keys:
        raise EmptyKeyConfig("match scoring needs at least one configured key")
    n = len(keys)

    # Pairs scoring 1.0 carry identical full projections, so the greedy
    # front runs inside projection groups: zip both sides in tie order.
    def full_projection(e: ExtractedElement) -> tuple[str, ...] | None:
        attrs = e.attributes
        values = []
        for key in keys:
            value = attrs.get(key)
            if value is None:
                return None
            values.append(value)
        return tuple(values)

    def tie_order(e: ExtractedElement) -> tuple[str, int]:
        return (e.origin_path, e.order)

    exp_groups: dict[tuple[str, ...], list[int]] = defaultdict(list)
    act_groups: dict[tuple[str, ...], list[int]] = defaultdict(list)
    exp_rest: list[int] = []
    act_rest: list[int] = []
    for i, e in enumerate(exp):
        proj = full_projection(e)
        if proj is None:
            exp_rest.append(i)
        else:
            exp_groups[proj].append(i)
    for j, a in enumerate(act):
        proj = full_projection(a)
        if proj is None:
            act_rest.append(j)
        else:
            act_groups[proj].append(j)

    pairs: list[tuple[int, int]] = []
    for proj, exp_ids in exp_groups.items():
        act_ids = act_groups.get(proj)
        if not act_ids:
            exp_rest.extend(exp_ids)
            continue
        exp_ids = sorted(exp_ids, key=lambda i: tie_order(exp[i]))
        act_ids = sorted(act_ids, key=lambda j: tie_order(act[j]))
        pairs.extend(zip(exp_ids, act_ids))
        exp_rest.extend(exp_ids[len(act_ids):])
        act_rest.extend(act_ids[len(exp_ids):])
    for proj, act_ids in act_groups.items():
        if proj not in exp_groups:
            act_rest.extend(act_ids)

    # Remaining pairs score below 1.0; count shared key/values through an
    # inverted index instead of touching all |exp| * |act| combinations.
    index: dict[tuple[str, str], list[int]] = defaultdict(list)
    for j in act_rest:
        attrs = act[j].attributes
        for key in keys:
            value = attrs.get(key)
            if value is not None:
                index[(key, value)].append(j)

    candidates: list[tuple[float, str, int, str, int]] = []
    for i in exp_rest:
        attrs = exp[i].attributes
        counts: dict[int, int] = {}
        for key in keys:
            value = attrs.get(key)
            if value is not None:
                for j in index.get((key, value), ()):
                    counts[j] = counts.get(j, 0) + 1
        for j, hits in counts.items():
            score = hits / n
            if score >= config.u:
                candidates.append((score, exp[i].origin_path, i, act[j].origin_path, j))

    candidates.sort(key=lambda c: (-c[0], c[1], c[3], c[2], c[4]))
    taken_exp: set[int] = set()
    taken_act: set[int] = set()
    for score, _, i, _, j in candidates:
        if i not in taken_exp and j not in taken_act:
            taken_exp.add(i)
            taken_act.add(j)
            pairs.append((i, j))

    if config.u <= 0.0:
        # Zero-score pairs also qualify; assign leftovers in tie order.
        left_exp = sorted((i for i in exp_rest if i not in taken_exp), key=lambda i: tie_order(exp[i]))
        left_act = sorted((j for j in act_rest if j not in taken_act), key=lambda j: tie_order(act[j]))
        pairs.extend(zip(left_exp, left_act))

    return pairs
