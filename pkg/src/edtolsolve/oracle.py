"""Brute-force reference solver."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .alphabet import HASH, bar, inv, is_var, positive
from .groups import free_reduce


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class OracleQuery:
    U: tuple
    V: tuple
    variables: tuple
    letters: tuple
    mode: str = "monoid"
    max_len: int = 3
    budget: int = 2_000_000


def reduced_words(letters: Sequence[int], max_len: int) -> list:
    """Reduced words in length-lexicographic order, never extending by the
    inverse of the last letter."""
    out = [()]
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for a in letters:
                if not (w and w[-1] == inv(a)):
                    nxt.append(w + (a,))
        out.extend(nxt)
        layer = nxt
    return out


def _substitute(word, sigma: dict) -> tuple:
    out = []
    for s in word:
        if is_var(s):
            v = sigma[positive(s)]
            out.extend(v if s == positive(s) else bar(v))
        else:
            out.append(s)
    return tuple(out)


def is_solution(U, V, sigma: dict, mode: str = "monoid") -> bool:
    u = _substitute(U, sigma)
    v = _substitute(V, sigma)
    if mode == "group":
        return free_reduce(u) == free_reduce(v)
    return u == v


def brute_solutions(q: OracleQuery) -> set:
    """All solution tuples with every component of length at most max_len."""
    if q.mode not in ("monoid", "group"):
        raise ValueError(f"unknown mode {q.mode}")
    if q.U.count(HASH) != q.V.count(HASH):
        raise ValueError("both sides need the same number of #")
    letters = sorted(set(q.letters) | {inv(a) for a in q.letters})
    words = reduced_words(letters, q.max_len)
    m = len(q.variables)
    if len(words) ** m > q.budget:
        raise BudgetExceeded(f"{len(words)}^{m} assignments exceed the budget {q.budget}")
    out = set()
    for vals in itertools.product(words, repeat=m):
        sigma = dict(zip(q.variables, vals))
        if is_solution(q.U, q.V, sigma, q.mode):
            out.add(vals)
    return out
