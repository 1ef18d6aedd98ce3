"""Involutive alphabets, the marker ``#`` and the constraint monoid N_F.

Symbols are plain ints. ``#`` is 0, constants are positive and variables
are negative. Involution partners are adjacent indices, so ``inv`` needs no
table: constants pair up as (1, 2), (3, 4), ... and variables as
(-1, -2), (-3, -4), ...

The positive letters of the input alphabet take the odd indices 1, 3, ...;
their inverses take the even ones. Fresh constants are allocated above them.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

HASH = 0

Word = tuple


def inv(s: int) -> int:
    if s > 0:
        return s + 1 if s & 1 else s - 1
    if s < 0:
        return s - 1 if (-s) & 1 else s + 1
    return 0


def is_var(s: int) -> bool:
    return s < 0


def positive(s: int) -> int:
    """The canonical member of the involution pair of ``s``."""
    if s > 0:
        return s if s & 1 else s - 1
    if s < 0:
        return s if (-s) & 1 else s + 1
    return 0


def bar(word: Sequence[int]) -> tuple:
    return tuple(inv(s) for s in reversed(word))


class Symbol(NamedTuple):
    id: int
    kind: str
    inv: int


class NF(NamedTuple):
    """Element of N_F. ``ONE`` and ``ZERO`` use the reserved pairs (0, 0) and (-1, -1)."""

    first: int
    last: int

    def __repr__(self) -> str:
        if self.first == 0:
            return "One"
        if self.first < 0:
            return "Zero"
        return f"Pair({self.first},{self.last})"


ONE = NF(0, 0)
ZERO = NF(-1, -1)


def pair(a: int, b: int) -> NF:
    return NF(a, b)


def nf_mul(u: NF, v: NF) -> NF:
    if u.first < 0 or v.first < 0:
        return ZERO
    if u.first == 0:
        return v
    if v.first == 0:
        return u
    if u.last == inv(v.first):
        return ZERO
    return NF(u.first, v.last)


def nf_inv(u: NF) -> NF:
    if u.first <= 0:
        return u
    return NF(inv(u.last), inv(u.first))


def mu0(s: int) -> NF:
    return ZERO if s == HASH else NF(s, s)


def mu0_word(w: Iterable[int]) -> NF:
    acc = ONE
    for s in w:
        acc = nf_mul(acc, mu0(s))
        if acc is ZERO or acc.first < 0:
            return ZERO
    return acc


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i + 1] != inv(w[i]) for i in range(len(w) - 1))


def nf_elements(letters: Iterable[int]) -> list:
    """All elements of N_F over the given A± letters, in a fixed order."""
    letters = sorted(letters)
    out = [ZERO, ONE]
    out.extend(NF(a, b) for a in letters for b in letters)
    return out


def nf_left_factors(target: NF, left: NF, candidates: Iterable[NF]) -> list:
    """Those ``x`` among ``candidates`` with ``left * x == target`` and ``x`` nonzero."""
    return [x for x in candidates if x.first >= 0 and nf_mul(left, x) == target]


def nf_right_factors(target: NF, right: NF, candidates: Iterable[NF]) -> list:
    return [x for x in candidates if x.first >= 0 and nf_mul(x, right) == target]


class PoolExhausted(RuntimeError):
    pass


def _odd_kappa_size(base: int) -> int:
    # C minus # must split into involution pairs, so |C| has to be odd
    return base if base % 2 else base + 1


class Universe:
    """Symbol tables for one solver run.

    ``letters`` are the names of the positive input letters. ``n`` is the
    input size |A| + |UV|; the constant pool holds ``kappa * n`` symbols and
    the variable pool ``6 * n``.
    """

    def __init__(self, letters: Sequence[str], n: int, kappa: int = 615,
                 var_names: dict | None = None):
        self.letters = tuple(letters)
        self.k = len(self.letters)
        self.n = n
        self.kappa = kappa
        self.size_C = max(_odd_kappa_size(kappa * n), 2 * self.k + 1)
        self.size_Omega = 6 * n
        self.first_fresh = 2 * self.k + 1
        self.var_names: dict[int, str] = dict(var_names or {})
        self.const_names: dict[int, str] = {}

    def resize(self, n: int) -> None:
        self.n = n
        self.size_C = max(_odd_kappa_size(self.kappa * n), 2 * self.k + 1)
        self.size_Omega = 6 * n

    @property
    def A_plus(self) -> frozenset:
        return frozenset(range(1, 2 * self.k, 2))

    @property
    def A_pm(self) -> frozenset:
        return frozenset(range(1, 2 * self.k + 1))

    @property
    def A(self) -> frozenset:
        return self.A_pm | {HASH}

    def is_A(self, s: int) -> bool:
        return 0 <= s <= 2 * self.k

    def letter(self, name: str, inverse: bool = False) -> int:
        s = 2 * self.letters.index(name) + 1
        return s + 1 if inverse else s

    def symbol(self, s: int) -> Symbol:
        return Symbol(s, "variable" if s < 0 else "constant", inv(s))

    def in_pools(self, s: int) -> bool:
        if s >= 0:
            return s < self.size_C
        return -s <= self.size_Omega

    def seed(self, i: int) -> int:
        """The i-th distinguished letter (0-based) used by final states."""
        return self.first_fresh + 2 * i

    def name(self, s: int) -> str:
        if s == HASH:
            return "#"
        if s > 0:
            p = positive(s)
            if p <= 2 * self.k:
                base = self.letters[(p - 1) // 2]
            else:
                base = self.const_names.get(p, f"c{(p - self.first_fresh) // 2 + 1}")
        else:
            p = positive(s)
            base = self.var_names.get(p, f"V{(-p + 1) // 2}")
        return base if s == p else base + "^"

    def fmt(self, word: Iterable[int], sep: str | None = None) -> str:
        names = [self.name(s) for s in word]
        if sep is None:
            sep = "" if all(len(x.rstrip("^")) == 1 for x in names) else " "
        return sep.join(names)

    def fmt_nf(self, u: NF) -> str:
        if u.first == 0:
            return "1"
        if u.first < 0:
            return "0"
        return f"({self.name(u.first)},{self.name(u.last)})"


class LetterPool:
    """Allocator for fresh constants and variables within one search context.

    Allocation always returns the lowest unused indices, which makes it
    deterministic and lets structurally equal states coincide.
    """

    def __init__(self, universe: Universe, used_constants: Iterable[int] = (),
                 used_variables: Iterable[int] = (), mu: dict | None = None):
        self.universe = universe
        self.used = set(used_constants)
        self.used_vars = set(used_variables)
        self.mu = mu if mu is not None else {}

    def fresh_letters(self, count: int, mu_values: Sequence[NF] = ()) -> list:
        out = []
        c = self.universe.first_fresh
        for i in range(count):
            while c in self.used or c + 1 in self.used:
                c += 2
            if c + 1 >= self.universe.size_C:
                raise PoolExhausted("constant pool exhausted")
            self.used.update((c, c + 1))
            if i < len(mu_values):
                self.mu[c] = mu_values[i]
                self.mu[c + 1] = nf_inv(mu_values[i])
            out.append((c, c + 1))
        return out

    def fresh_variable(self) -> tuple:
        x = -1
        while x in self.used_vars or x - 1 in self.used_vars:
            x -= 2
        if -(x - 1) > self.universe.size_Omega:
            raise PoolExhausted("variable pool exhausted")
        self.used_vars.update((x, x - 1))
        return (x, x - 1)


def fresh_letters(pool: LetterPool, count: int, mu_values: Sequence[NF] = ()) -> list:
    return pool.fresh_letters(count, mu_values)
