"""Shared fixtures and independent oracles used across the test modules.

The oracles here deliberately re-derive results via a different route
than the production code (plain recursion, brute force, bitmask DP) so
tests do not just compare an implementation against itself.
"""

from __future__ import annotations

import os
import random

from agsdiff.ags import Element, GuiState, element, state

# ---- canonical fixture elements ----
# Sign-in anchor before and after the framework migration, plus an
# unchanged logo element used by the identification walkthrough.

SIGN_IN = element(
    {
        "id": "login",
        "background-color": "#047bf8",
        "href": "/app.html",
        "text": "Sign in",
        "type": "a",
    }
)

LOG_IN = element(
    {
        "id": "login",
        "background-color": "#292b2c",
        "onclick": "login()",
        "text": "Log in",
        "type": "button",
    }
)

LOG_IN_RENAMED = element(
    {
        "id": "signin",
        "background-color": "#292b2c",
        "onclick": "login()",
        "text": "Log in",
        "type": "button",
    }
)

LOGO = element({"id": "logo", "text": "ACME", "type": "img"})


def login_snapshot(phase: str) -> bytes:
    """Browser snapshot of the demo login page, before or after the
    button migrated from an anchor to a real button element.

    Exactly five attribute-level changes separate the two phases once
    ``path`` is ignored: text, type, and background-color change value,
    href exists only before, onclick only after.
    """
    import json

    if phase == "before":
        control = {
            "path": "/html[1]/body[1]/a[1]",
            "html": {"id": "login", "href": "/app.html", "class": "btn btn-primary"},
            "css": {"background-color": "#047bf8"},
            "rect": {"x": 560, "y": 320, "w": 160, "h": 40},
            "text": "Sign in",
        }
    elif phase == "after":
        control = {
            "path": "/html[1]/body[1]/button[1]",
            "html": {"id": "login", "onclick": "login()", "class": "btn btn-primary"},
            "css": {"background-color": "#292b2c"},
            "rect": {"x": 560, "y": 320, "w": 160, "h": 40},
            "text": "Log in",
        }
    else:
        raise ValueError(phase)
    return json.dumps(
        {
            "nodes": [
                {
                    "path": "/html[1]",
                    "html": {"lang": "en"},
                    "rect": {"x": 0, "y": 0, "w": 1280, "h": 800},
                },
                {
                    "path": "/html[1]/body[1]",
                    "rect": {"x": 0, "y": 8, "w": 1280, "h": 784},
                },
                control,
            ]
        }
    ).encode()


LOGIN_CHANGES = {
    "text": ("Sign in", "Log in"),
    "type": ("a", "button"),
    "background-color": ("#047bf8", "#292b2c"),
    "href": ("/app.html", None),
    "onclick": (None, "login()"),
}

FOUR_NODE_PAGE = state(
    element(
        {"lang": "en", "type": "html"},
        [
            element({"type": "head"}),
            element(
                {"type": "body"},
                [element({"name": "foo", "text": "bar", "type": "button"})],
            ),
        ],
    )
)


# ---- random state generation (seeded, deterministic) ----

_KEY_POOL = ["id", "path", "type", "text", "x", "y", "width", "height", "class", "name", "href", "role"]
_VALUE_POOL = ["a", "b", "c", "login", "42", "100", "btn", "x1", ""]


def random_element(rng: random.Random, depth: int, max_depth: int, budget: list[int]) -> Element:
    attrs = {}
    for _ in range(rng.randint(0, 5)):
        attrs[rng.choice(_KEY_POOL)] = rng.choice(_VALUE_POOL)
    children = []
    while depth < max_depth and budget[0] > 0 and rng.random() < 0.45:
        budget[0] -= 1
        children.append(random_element(rng, depth + 1, max_depth, budget))
    return element(attrs, children)


def random_state(rng: random.Random, max_depth: int = 6, max_nodes: int = 50) -> GuiState:
    budget = [rng.randint(0, max_nodes - 1)]
    roots = [random_element(rng, 1, max_depth, budget)]
    while budget[0] > 0 and rng.random() < 0.3:
        budget[0] -= 1
        roots.append(random_element(rng, 1, max_depth, budget))
    return state(*roots)


def mutate_state(rng: random.Random, value: GuiState) -> GuiState:
    """A randomly perturbed copy: tweak, add or drop an attribute, or
    drop/duplicate an element."""

    ops = ["tweak", "add", "remove", "drop-child", "dup-child"]
    op = rng.choice(ops)

    def rebuild(elem: Element) -> Element:
        attrs = dict(elem.attribute_map())
        if op == "tweak" and attrs and rng.random() < 0.4:
            key = rng.choice(sorted(attrs))
            attrs[key] = attrs[key] + "*"
        elif op == "add" and rng.random() < 0.4:
            attrs.setdefault(rng.choice(_KEY_POOL), rng.choice(_VALUE_POOL))
        elif op == "remove" and attrs and rng.random() < 0.4:
            attrs.pop(rng.choice(sorted(attrs)))
        children = [rebuild(c) for c in elem.children]
        if op == "drop-child" and children and rng.random() < 0.3:
            children.pop(rng.randrange(len(children)))
        elif op == "dup-child" and children and rng.random() < 0.3:
            children.append(children[rng.randrange(len(children))])
        return element(attrs, children)

    return state(*[rebuild(root) for root in value.roots])


# ---- independent oracles ----


def normalized(value: GuiState):
    """Order-free structural normal form, computed without the package's
    canonicalize: nested tuples with attribute pairs sorted."""

    def norm(elem: Element):
        pairs = tuple(sorted((a.key, a.value) for a in elem.attributes))
        return (pairs, tuple(norm(c) for c in elem.children))

    return tuple(norm(root) for root in value.roots)


def states_equal_oracle(a: GuiState, b: GuiState) -> bool:
    return normalized(a) == normalized(b)


def count_nodes_oracle(value: GuiState) -> int:
    def count(elem: Element) -> int:
        return 1 + sum(count(c) for c in elem.children)

    return sum(count(root) for root in value.roots)


def jaro_winkler_reference(s1: str, s2: str) -> float:
    """Textbook Jaro-Winkler via explicit match index sets."""
    if s1 == s2:
        return 1.0
    if not s1 or not s2:
        return 0.0
    window = max(len(s1), len(s2)) // 2 - 1
    free = list(range(len(s2)))
    matched1: list[int] = []
    matched2: list[int] = []
    for i, ch in enumerate(s1):
        for j in list(free):
            if j < i - window or j > i + window:
                continue
            if s2[j] == ch:
                free.remove(j)
                matched1.append(i)
                matched2.append(j)
                break
    m = len(matched1)
    if m == 0:
        return 0.0
    seq1 = [s1[i] for i in sorted(matched1)]
    seq2 = [s2[j] for j in sorted(matched2)]
    transpositions = sum(x != y for x, y in zip(seq1, seq2)) // 2
    jaro = (m / len(s1) + m / len(s2) + (m - transpositions) / m) / 3.0
    prefix = min(4, len(os.path.commonprefix([s1, s2])))
    return jaro + prefix * 0.1 * (1.0 - jaro)


def max_assignment_oracle(scores: list[list[float]], u: float) -> float:
    """Exhaustive best total score over injective partial assignments
    restricted to pairs scoring at least ``u`` (bitmask DP)."""
    m = len(scores)
    n = len(scores[0]) if m else 0
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def best(i: int, used: int) -> float:
        if i == m:
            return 0.0
        out = best(i + 1, used)
        for j in range(n):
            if not used & (1 << j) and scores[i][j] >= u:
                out = max(out, scores[i][j] + best(i + 1, used | (1 << j)))
        return out

    return best(0, 0)
