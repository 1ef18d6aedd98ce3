"""Partially commutative words.

A type map ``theta`` sends a typed symbol to its type letter; a symbol and
its type commute and nothing else does. Traces here are plain tuples
compared modulo those commutations.
"""

from __future__ import annotations

from collections import Counter
from itertools import combinations
from typing import Mapping, Sequence

EMPTY: Mapping = {}


def commute(x: int, y: int, theta: Mapping) -> bool:
    return x != y and (theta.get(x) == y or theta.get(y) == x)


def _active_pairs(letters, theta: Mapping) -> list:
    return [(x, t) for x, t in theta.items() if x in letters and t in letters]


def projection(w: Sequence[int], pair) -> tuple:
    a, b = pair
    return tuple(s for s in w if s == a or s == b)


def trace_eq(u: Sequence[int], w: Sequence[int], theta: Mapping = EMPTY) -> bool:
    if len(u) != len(w):
        return False
    u = tuple(u)
    w = tuple(w)
    if u == w:
        return True
    cu = Counter(u)
    if cu != Counter(w):
        return False
    if not theta or not _active_pairs(cu, theta):
        return False
    for a, b in combinations(sorted(cu), 2):
        if commute(a, b, theta):
            continue
        if projection(u, (a, b)) != projection(w, (a, b)):
            return False
    return True


def normal_form(w: Sequence[int], theta: Mapping = EMPTY) -> tuple:
    w = tuple(w)
    if not theta or not _active_pairs(set(w), theta):
        return w
    rest = list(w)
    out = []
    while rest:
        best = None
        for i, s in enumerate(rest):
            if best is not None and s >= rest[best]:
                continue
            if all(commute(rest[j], s, theta) for j in range(i)):
                best = i
        out.append(rest.pop(best))
    return tuple(out)


def is_factor(u: Sequence[int], w: Sequence[int], theta: Mapping = EMPTY) -> bool:
    u = tuple(u)
    w = tuple(w)
    if not u:
        return True
    if len(u) > len(w):
        return False
    if not theta or not _active_pairs(set(w), theta):
        return _substring(u, w)
    need = Counter(u)
    if any(Counter(w)[s] < c for s, c in need.items()):
        return False
    # label each position of w as prefix (0), factor (1) or suffix (2); a
    # labelling is consistent iff labels never decrease along dependent pairs
    n = len(w)
    labels = [0] * n
    taken = Counter()

    def floor(i):
        lo = 0
        for j in range(i):
            if labels[j] > lo and not commute(w[j], w[i], theta):
                lo = labels[j]
        return lo

    def go(i, used):
        if used == len(u):
            # labelling the rest as suffix is always consistent
            sub = tuple(w[j] for j in range(i) if labels[j] == 1)
            return trace_eq(sub, u, theta)
        if n - i < len(u) - used:
            return False
        lo = floor(i)
        s = w[i]
        if lo <= 1 and taken[s] < need[s]:
            taken[s] += 1
            labels[i] = 1
            if go(i + 1, used + 1):
                return True
            taken[s] -= 1
        for lab in (0, 2):
            if lab >= lo:
                labels[i] = lab
                if go(i + 1, used):
                    return True
        labels[i] = 0
        return False

    return go(0, 0)


def _substring(u: tuple, w: tuple) -> bool:
    k = len(u)
    first = u[0]
    for i in range(len(w) - k + 1):
        if w[i] == first and w[i:i + k] == u:
            return True
    return False


def commutation_class(w: Sequence[int], theta: Mapping = EMPTY) -> set:
    """Every word trace-equal to ``w``, by closing under adjacent swaps."""
    start = tuple(w)
    seen = {start}
    todo = [start]
    while todo:
        cur = todo.pop()
        for i in range(len(cur) - 1):
            if commute(cur[i], cur[i + 1], theta):
                nxt = cur[:i] + (cur[i + 1], cur[i]) + cur[i + 2:]
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return seen
