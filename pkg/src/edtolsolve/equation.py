"""Extended equations (the NFA states), W_init, weights and validity checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .alphabet import (HASH, NF, ONE, ZERO, Universe, bar, inv, is_var, mu0,
                       nf_inv, nf_mul, positive)
from .traces import EMPTY, is_factor, normal_form, trace_eq


class ExtendedEquation:
    """A state (W, B, X, theta, mu).

    ``mu`` only holds entries for symbols outside A; A letters use mu0.
    ``W`` is kept in trace normal form so that equal states compare equal.
    """

    __slots__ = ("W", "B", "X", "theta", "mu", "_key", "_hash")

    def __init__(self, W: Sequence[int], B: Iterable[int], X: Iterable[int],
                 theta: Mapping | None = None, mu: Mapping | None = None):
        self.theta = dict(theta or {})
        self.W = normal_form(W, self.theta) if self.theta else tuple(W)
        self.B = frozenset(B)
        self.X = frozenset(X)
        self.mu = dict(mu or {})
        self._key = None
        self._hash = None

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.W, tuple(sorted(self.B)), tuple(sorted(self.X)),
                         tuple(sorted(self.theta.items())),
                         tuple(sorted(self.mu.items())))
        return self._key

    def __eq__(self, other):
        return isinstance(other, ExtendedEquation) and self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        return f"ExtendedEquation(W={self.W!r}, |B|={len(self.B)}, X={sorted(self.X)})"

    def mu_of(self, s: int) -> NF:
        v = self.mu.get(s)
        return v if v is not None else mu0(s)

    def mu_word(self, w: Iterable[int]) -> NF:
        acc = ONE
        for s in w:
            acc = nf_mul(acc, self.mu_of(s))
            if acc.first < 0:
                return ZERO
        return acc

    def variables(self) -> list:
        """Canonical members of the variable pairs, ordered by first occurrence."""
        seen = []
        got = set()
        for s in self.W:
            if s < 0:
                p = positive(s)
                if p not in got:
                    got.add(p)
                    seen.append(p)
        return seen


def blocks(W: Sequence[int]) -> list:
    out = []
    cur = []
    for s in W[1:]:
        if s == HASH:
            out.append(tuple(cur))
            cur = []
        else:
            cur.append(s)
    return out


def join_blocks(parts: Iterable[Sequence[int]]) -> tuple:
    w = [HASH]
    for p in parts:
        w.extend(p)
        w.append(HASH)
    return tuple(w)


@dataclass(frozen=True)
class Bounds:
    n: int
    winit_len: int
    marker_count: int = 0
    small_bound: int = 0
    pair_start_bound: int = 0
    hard_cap: int = 0
    max_states: int = 200_000
    max_depth: int = 10_000
    compress_above: int | None = None
    partition_limit: int | None = None

    @classmethod
    def for_equation(cls, n: int, winit_len: int, marker_count: int, **kw) -> "Bounds":
        return cls(n=n, winit_len=winit_len, marker_count=marker_count,
                   small_bound=96 * n + 6 * winit_len,
                   pair_start_bound=104 * n + 6 * winit_len,
                   hard_cap=204 * n, **kw)


def build_winit(U: Sequence[int], V: Sequence[int], variables: Sequence[int],
                universe: Universe) -> ExtendedEquation:
    U = tuple(U)
    V = tuple(V)
    listed = set()
    for x in variables:
        if not is_var(x):
            raise ValueError(f"{x} is not a variable")
        listed.update((x, inv(x)))
    if U.count(HASH) != V.count(HASH):
        raise ValueError("U and V must contain the same number of #")
    for s in U + V:
        if s == HASH:
            continue
        if is_var(s) and s not in listed:
            raise ValueError(f"variable {universe.name(s)} is not listed")
        if not is_var(s) and not universe.is_A(s):
            raise ValueError(f"symbol {s} is not a letter of A")
    parts = [(x,) for x in variables] + [U, V, bar(U), bar(V)]
    parts += [(inv(x),) for x in reversed(variables)]
    W = join_blocks(parts)
    return ExtendedEquation(W, universe.A, listed)


def weight(V: ExtendedEquation) -> tuple:
    w = len(V.W)
    distinct = len({s for s in V.W if s >= 0})
    return (w, w - distinct, w - len(V.theta), len(V.B))


def closure_violations(V: ExtendedEquation, factor_limit: int | None = None) -> list:
    """Factors whose mirror image is missing from W.

    With ``factor_limit`` unset each block is tested as a whole, which is
    equivalent because every #-free factor lies inside one block and factors
    of factors are factors. With a limit, every factor up to that length is
    tested directly.
    """
    bl = blocks(V.W)
    theta = V.theta or EMPTY
    bad = []
    if factor_limit is None:
        distinct = set(bl)
        for b in distinct:
            m = bar(b)
            if m in distinct:
                continue
            if not any(is_factor(m, other, theta) for other in distinct):
                bad.append(b)
        return bad
    seen = set()
    for b in bl:
        for i in range(len(b)):
            for j in range(i + 1, min(len(b), i + factor_limit) + 1):
                x = b[i:j]
                if x in seen:
                    continue
                seen.add(x)
                m = bar(x)
                if not any(is_factor(m, other, theta) for other in bl):
                    bad.append(x)
    return bad


def validate_state(V: ExtendedEquation, bounds: Bounds, A: Iterable[int] | None = None,
                   factor_limit: int | None = None) -> list:
    out = []
    W = V.W
    if len(W) > bounds.hard_cap:
        out.append("|W| exceeds 204n")
    occ = sum(1 for s in W if s < 0)
    cap = 4 * bounds.n if not V.theta else 12 * bounds.n
    if occ > cap:
        out.append("too many variable occurrences")
    if not W or W[0] != HASH or W[-1] != HASH or W.count(HASH) != bounds.marker_count:
        out.append("marker count or shape")
    for s in V.B:
        if s != HASH and V.mu_of(s).first < 0:
            out.append(f"mu({s}) = 0")
    for x in V.X:
        m = V.mu.get(x)
        if m is not None and m.first < 0:
            out.append(f"mu({x}) = 0")
    present_vars = {s for s in W if s < 0}
    if present_vars != set(V.X):
        out.append("variable set differs from the variables in W")
    if closure_violations(V, factor_limit):
        out.append("factor closure")
    for s in W:
        if s >= 0 and s not in V.B:
            out.append(f"constant {s} outside B")
            break
    if A is not None and not set(A) <= V.B:
        out.append("B does not contain A")
    if any(inv(s) not in V.B for s in V.B) or any(inv(x) not in V.X for x in V.X):
        out.append("B or X not closed under involution")
    for x, t in V.theta.items():
        if V.theta.get(inv(x)) != inv(t) or t not in V.B or (x not in V.B and x not in V.X):
            out.append("theta malformed")
            break
    return out


def is_initial(V: ExtendedEquation, winit: ExtendedEquation) -> bool:
    return (V.W == winit.W and V.B == winit.B and V.X == winit.X and not V.theta
            and all(x in V.mu and V.mu[x].first >= 0 for x in V.X))


def is_final(V: ExtendedEquation, seeds: Sequence[int]) -> bool:
    if V.X or V.theta or V.W != bar(V.W):
        return False
    bl = blocks(V.W)
    if len(bl) < len(seeds):
        return False
    return all(bl[i] == (c,) for i, c in enumerate(seeds))


def is_small(V: ExtendedEquation, bounds: Bounds) -> bool:
    return len(V.W) <= bounds.small_bound


def close_assignment(sigma: Mapping) -> dict:
    out = dict(sigma)
    for x, w in sigma.items():
        out.setdefault(inv(x), bar(w))
    return out


def substitute(word: Iterable[int], sigma: Mapping) -> tuple:
    out = []
    for s in word:
        if s < 0:
            out.extend(sigma[s])
        else:
            out.append(s)
    return tuple(out)


def check_B_solution(V: ExtendedEquation, sigma: Mapping) -> bool:
    sigma = close_assignment(sigma)
    for x in V.X:
        if x not in sigma:
            return False
        w = tuple(sigma[x])
        if any(s < 0 or s not in V.B for s in w):
            return False
        t = V.theta.get(x)
        if t is not None and any(s != t for s in w):
            return False
        if V.mu_word(w) != V.mu_of(x):
            return False
    lhs = substitute(V.W, sigma)
    return trace_eq(lhs, bar(lhs), V.theta)


def refute(V: ExtendedEquation, lengths: bool = True) -> str | None:
    """A reason why V has no solution, or None if none was found.

    Every check is a necessary condition on solutions, so pruning with it
    never loses a solution.
    """
    bl = blocks(V.W)
    N = len(bl)
    pairs = [(bl[k], bar(bl[N - 1 - k])) for k in range(N // 2)]
    if N % 2:
        mid = bl[N // 2]
        pairs.append((mid, bar(mid)))
    free = not V.theta
    mu_of = V.mu_of
    rows = []
    for u, v in pairs:
        if V.mu_word(u) != V.mu_word(v):
            return "mu"
        if free:
            r = _strip(u, v, mu_of)
            if r is not None:
                return r
        if lengths:
            row = {}
            const = 0
            for s in u:
                if s < 0:
                    p = positive(s)
                    row[p] = row.get(p, 0) + 1
                else:
                    const -= 1
            for s in v:
                if s < 0:
                    p = positive(s)
                    row[p] = row.get(p, 0) - 1
                else:
                    const += 1
            rows.append((row, const))
    if lengths and rows:
        return _lengths(V, rows)
    return None


def _strip(u, v, mu_of):
    i = j = 0
    nu, nv = len(u), len(v)
    while True:
        while i < nu and u[i] < 0 and mu_of(u[i]) == ONE:
            i += 1
        while j < nv and v[j] < 0 and mu_of(v[j]) == ONE:
            j += 1
        if i == nu or j == nv:
            break
        x, y = u[i], v[j]
        if x >= 0 and y >= 0:
            if x != y:
                return "prefix"
            i += 1
            j += 1
            continue
        if x < 0 and y >= 0:
            if mu_of(x).first != mu_of(y).first:
                return "prefix"
        elif y < 0 and x >= 0:
            if mu_of(y).first != mu_of(x).first:
                return "prefix"
        break
    k, l = nu, nv
    while True:
        while k > i and u[k - 1] < 0 and mu_of(u[k - 1]) == ONE:
            k -= 1
        while l > j and v[l - 1] < 0 and mu_of(v[l - 1]) == ONE:
            l -= 1
        if k == i or l == j:
            break
        x, y = u[k - 1], v[l - 1]
        if x >= 0 and y >= 0:
            if x != y:
                return "suffix"
            k -= 1
            l -= 1
            continue
        if x < 0 and y >= 0:
            if mu_of(x).last != mu_of(y).last:
                return "suffix"
        elif y < 0 and x >= 0:
            if mu_of(y).last != mu_of(x).last:
                return "suffix"
        break
    if (k == i) != (l == j):
        # one side is empty, the other still holds a nonempty symbol
        return "empty side"
    return None


def ends_clash(u, v, mu_of) -> bool:
    """Compare the ends of u and v under a partial constraint map.

    ``mu_of`` returns None for a variable without a value yet; the scan
    stops there. True means no solution can match the two ends.
    """
    for step in (1, -1):
        i = 0 if step == 1 else len(u) - 1
        j = 0 if step == 1 else len(v) - 1
        while 0 <= i < len(u) and 0 <= j < len(v):
            x, y = u[i], v[j]
            mx = mu_of(x) if x < 0 else None
            my = mu_of(y) if y < 0 else None
            if (x < 0 and mx is None) or (y < 0 and my is None):
                break
            if x < 0 and mx == ONE:
                i += step
                continue
            if y < 0 and my == ONE:
                j += step
                continue
            if x >= 0 and y >= 0:
                if x != y:
                    return True
                i += step
                j += step
                continue
            end = (lambda m: m.first) if step == 1 else (lambda m: m.last)
            a = end(mx) if x < 0 else x
            b = end(my) if y < 0 else y
            if a != b:
                return True
            break
    return False


def _lengths(V, rows):
    """Gaussian elimination on the length equations of the block pairs."""
    cols = sorted({p for row, _ in rows for p in row})
    zero = [p for p in cols if V.mu_of(p) == ONE]
    index = {p: i for i, p in enumerate(cols)}
    m = len(cols)
    mat = []
    for row, const in rows:
        r = [Fraction(0)] * (m + 1)
        for p, c in row.items():
            r[index[p]] += c
        r[m] = Fraction(const)
        mat.append(r)
    for p in zero:
        r = [Fraction(0)] * (m + 1)
        r[index[p]] = Fraction(1)
        mat.append(r)
    piv_cols = []
    rank = 0
    for c in range(m):
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][c]
        mat[rank] = [x / pv for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c] != 0:
                f = mat[r][c]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        piv_cols.append(c)
        rank += 1
    for r in range(rank, len(mat)):
        if mat[r][m] != 0:
            return "lengths inconsistent"
    # a pivot row with no free columns fixes that length exactly
    for r, c in enumerate(piv_cols):
        if any(mat[r][j] != 0 for j in range(m) if j != c):
            continue
        val = mat[r][m]
        p = cols[c]
        if val.denominator != 1 or val < 0:
            return "length not natural"
        if val == 0 and V.mu_of(p) != ONE:
            return "length zero"
    return None
