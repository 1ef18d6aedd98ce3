"""Substitution and compression transitions between extended equations.

Labels are endomorphisms of C* stored as finite letter -> word tables. A
compression edge V -> V' carries h with h(W') = W; a substitution edge carries
the identity and records the substitution that produced W' = tau(W).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .alphabet import HASH, NF, ONE, Universe, bar, inv, nf_inv, nf_mul, positive
from .equation import ExtendedEquation, blocks, join_blocks, weight
from .traces import trace_eq


class InvalidTransition(ValueError):
    """Raised when a requested transition would leave the state space."""


class Endo:
    """Endomorphism of C*: identity except on the listed letters.

    The table is closed under the involution on construction, so that
    h(inv(c)) = bar(h(c)) always holds.
    """

    __slots__ = ("_map", "_items")

    def __init__(self, mapping: Mapping[int, Sequence[int]] | None = None):
        m = {}
        for c, w in (mapping or {}).items():
            if c < 0:
                raise ValueError("endomorphisms act on constants only")
            w = tuple(w)
            for x, y in ((c, w), (inv(c), bar(w))):
                if x in m and m[x] != y:
                    raise ValueError(f"letter {x} mapped inconsistently")
                m[x] = y
        self._map = {c: w for c, w in m.items() if w != (c,)}
        self._items = tuple(sorted(self._map.items()))

    def __call__(self, c: int) -> tuple:
        return self._map.get(c, (c,))

    def apply(self, word: Iterable[int]) -> tuple:
        out = []
        get = self._map.get
        for s in word:
            w = get(s) if s >= 0 else None
            if w is None:
                out.append(s)
            else:
                out.extend(w)
        return tuple(out)

    def items(self) -> tuple:
        return self._items

    def canonical_items(self) -> tuple:
        """One entry per involution pair, keyed by its positive member."""
        return tuple((c, w) for c, w in self._items if positive(c) == c)

    def is_identity(self) -> bool:
        return not self._map

    def then(self, other: "Endo") -> "Endo":
        """self after other: c -> self(other(c))."""
        keys = set(self._map) | set(other._map)
        return Endo({c: self.apply(other(c)) for c in keys})

    def __eq__(self, other):
        return isinstance(other, Endo) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __repr__(self):
        return f"Endo({dict(self.canonical_items())!r})"


IDENTITY = Endo()


class SubstitutionSpec(NamedTuple):
    """tau on one variable; the partner variable is rewritten by mirroring.

    kind 'erase': tau(X) = 1.  kind 'pop': tau(X) = word X with 1 <= |word| <= 2.
    kind 'split': tau(X) = c X' X where word = (c,) and new_var = X', typed by c.
    Popping on the right of X is a pop on inv(X).
    """

    kind: str
    var: int
    word: tuple = ()
    new_var: int = 0

    def tau(self) -> dict:
        X = self.var
        if self.kind == "erase":
            img = ()
        elif self.kind == "pop":
            img = tuple(self.word) + (X,)
        elif self.kind == "split":
            img = (self.word[0], self.new_var, X)
        else:
            raise ValueError(self.kind)
        return {X: img, inv(X): bar(img)}


def apply_tau(W: Sequence[int], tau: Mapping[int, tuple]) -> tuple:
    out = []
    for s in W:
        img = tau.get(s) if s < 0 else None
        if img is None:
            out.append(s)
        else:
            out.extend(img)
    return tuple(out)


def apply_substitution(V: ExtendedEquation, spec: SubstitutionSpec,
                       mu_choice: Mapping[int, NF] | None = None) -> ExtendedEquation:
    """The state reached by the substitution; ``mu_choice`` gives the new values."""
    X = spec.var
    if X not in V.X:
        raise InvalidTransition(f"variable {X} not present")
    mu_choice = dict(mu_choice or {})
    mu = dict(V.mu)
    theta = dict(V.theta)
    Xs = set(V.X)
    B = V.B
    mX = V.mu_of(X)
    t = theta.get(X)
    if spec.kind == "erase":
        if mX != ONE:
            raise InvalidTransition("erasing a variable whose constraint is not 1")
        Xs -= {X, inv(X)}
        for y in (X, inv(X)):
            mu.pop(y, None)
            theta.pop(y, None)
    elif spec.kind == "pop":
        u = tuple(spec.word)
        if not 1 <= len(u) <= 2 or any(s <= 0 or s not in B for s in u):
            raise InvalidTransition("popped word must be 1 or 2 letters of B")
        if t is not None and any(s != t for s in u):
            raise InvalidTransition("typed variable may only pop its type")
        new = mu_choice.get(X)
        if new is None or new.first < 0:
            raise InvalidTransition("missing or zero constraint for the residual")
        if nf_mul(V.mu_word(u), new) != mX:
            raise InvalidTransition("constraint does not factor")
        mu[X] = new
        mu[inv(X)] = nf_inv(new)
    elif spec.kind == "split":
        c = spec.word[0]
        Y = spec.new_var
        if c <= 0 or c not in B:
            raise InvalidTransition("split letter must be in B")
        if Y in V.X or inv(Y) in V.X or Y >= 0:
            raise InvalidTransition("split needs a fresh variable")
        if t is not None:
            raise InvalidTransition("typed variables are not split")
        mY = mu_choice.get(Y)
        mX2 = mu_choice.get(X)
        if mY is None or mX2 is None or mY.first < 0 or mX2.first < 0:
            raise InvalidTransition("missing constraint")
        if nf_mul(nf_mul(V.mu_of(c), mY), mX2) != mX:
            raise InvalidTransition("constraint does not factor")
        if mY not in (ONE, V.mu_of(c)):
            raise InvalidTransition("typed variable constraint must be a power of its type")
        Xs |= {Y, inv(Y)}
        theta[Y] = c
        theta[inv(Y)] = inv(c)
        mu[Y] = mY
        mu[inv(Y)] = nf_inv(mY)
        mu[X] = mX2
        mu[inv(X)] = nf_inv(mX2)
    else:
        raise InvalidTransition(f"unknown substitution kind {spec.kind}")
    W2 = apply_tau(V.W, spec.tau())
    out = ExtendedEquation(W2, B, Xs, theta, mu)
    if set(s for s in out.W if s < 0) != out.X:
        raise InvalidTransition("variable set out of sync with W")
    return out


def _rewrite_pairs(W: Sequence[int], h: Endo, B_new: Iterable[int]) -> tuple:
    """Rewrite W left to right, replacing images of letters of B_new by the letters.

    Only length-2 images and letter renamings are handled; the caller
    guarantees the images do not overlap.
    """
    two = {}
    one = {}
    for c in B_new:
        img = h(c)
        if len(img) == 2:
            two[img] = c
        elif len(img) == 1 and img[0] != c:
            if img[0] in one:
                raise InvalidTransition("ambiguous renaming")
            one[img[0]] = c
    out = []
    i = 0
    n = len(W)
    while i < n:
        if i + 1 < n and (W[i], W[i + 1]) in two:
            out.append(two[(W[i], W[i + 1])])
            i += 2
            continue
        out.append(one.get(W[i], W[i]))
        i += 1
    return tuple(out)


def compress(V: ExtendedEquation, h: Endo, B_new: Iterable[int], A: Iterable[int],
             W_new: Sequence[int] | None = None, theta_new: Mapping | None = None,
             final: bool = False) -> ExtendedEquation:
    """The state V' with h(W') = W; mu on letters outside A is induced by h."""
    B_new = frozenset(B_new)
    A = frozenset(A)
    if W_new is None:
        if V.theta:
            raise InvalidTransition("generic rewriting needs an untyped state")
        W_new = _rewrite_pairs(V.W, h, B_new)
    for c in B_new:
        img = h(c)
        if any(s not in V.B for s in img):
            raise InvalidTransition(f"h({c}) leaves B")
        if not final and not 1 <= len(img) <= 2:
            raise InvalidTransition(f"|h({c})| = {len(img)}")
    mu = {x: m for x, m in V.mu.items() if x < 0}
    for c in B_new:
        if c in A:
            continue
        m = V.mu_word(h(c))
        if m.first < 0:
            raise InvalidTransition(f"mu(h({c})) = 0")
        mu[c] = m
    out = ExtendedEquation(W_new, B_new, V.X, theta_new or {}, mu)
    if any(s >= 0 and s not in B_new for s in out.W):
        raise InvalidTransition("W' uses letters outside B'")
    if not trace_eq(h.apply(out.W), V.W, V.theta):
        raise InvalidTransition("h(W') differs from W")
    if not final and not weight(out) < weight(V):
        raise InvalidTransition("weight does not decrease")
    return out


def final_compress(V: ExtendedEquation, universe: Universe, m: int):
    """Compress a variable-free symmetric state to the final state over the seeds."""
    if V.X or V.theta:
        raise InvalidTransition("final compression needs X and theta empty")
    if V.W != bar(V.W):
        raise InvalidTransition("W is not its own mirror image")
    seeds = [universe.seed(i) for i in range(m)]
    bl = blocks(V.W)
    N = len(bl)
    if N < 2 * m:
        raise InvalidTransition("too few blocks")
    if all(bl[i] == (c,) for i, c in enumerate(seeds)) and _is_seed_final(bl, m, universe):
        raise InvalidTransition("state is already final")
    table = {}
    new = [None] * N
    extra = universe.seed(N)
    ren = {}
    for k in range(N // 2):
        u = bl[k]
        if k < m or (u and V.mu_word(u).first > 0):
            c = universe.seed(k)
            if k < m and V.mu_word(u).first < 0:
                raise InvalidTransition("variable block is not reduced")
            table[c] = u
            new[k] = (c,)
            new[N - 1 - k] = (inv(c),)
        else:
            lit = []
            for s in u:
                if universe.is_A(s):
                    lit.append(s)
                    continue
                p = positive(s)
                if p not in ren:
                    ren[p] = extra
                    table[extra] = (p,)
                    extra += 2
                lit.append(ren[p] if s == p else inv(ren[p]))
            new[k] = tuple(lit)
            new[N - 1 - k] = bar(lit)
    if N % 2:
        mid = bl[N // 2]
        lit = []
        for s in mid:
            if universe.is_A(s):
                lit.append(s)
                continue
            p = positive(s)
            if p not in ren:
                ren[p] = extra
                table[extra] = (p,)
                extra += 2
            lit.append(ren[p] if s == p else inv(ren[p]))
        new[N // 2] = tuple(lit)
    h = Endo(table)
    if h.is_identity():
        raise InvalidTransition("final compression must not be the identity")
    W2 = join_blocks(new)
    B2 = set(universe.A)
    for c in table:
        B2.update((c, inv(c)))
    mu = {}
    for c in table:
        for x in (c, inv(c)):
            mx = V.mu_word(h(x))
            if mx.first < 0:
                raise InvalidTransition("seed image not reduced")
            mu[x] = mx
    out = ExtendedEquation(W2, B2, (), {}, mu)
    total = sum(len(h(c)) for c in out.B if not universe.is_A(c))
    if total > len(V.W):
        raise InvalidTransition("final label exceeds |W|")
    if not trace_eq(h.apply(out.W), V.W):
        raise InvalidTransition("h(W') differs from W")
    return out, h


def _is_seed_final(bl, m, universe) -> bool:
    return all(all(universe.is_A(s) or s >= universe.seed(0) for s in b) for b in bl[m:])


@dataclass(frozen=True)
class Edge:
    src: tuple
    dst: tuple
    label: Endo = field(default=IDENTITY)
    kind: str = "substitution"
    spec: SubstitutionSpec | None = None

    def __post_init__(self):
        if self.kind not in ("substitution", "compression", "final-compression"):
            raise ValueError(self.kind)

    def describe(self, universe: Universe | None = None) -> str:
        if self.kind == "substitution":
            s = self.spec
            if s is None:
                return "substitution"
            name = universe.name if universe else str
            fmt = universe.fmt if universe else (lambda w, sep=None: " ".join(map(str, w)))
            if s.kind == "erase":
                return f"{name(s.var)} -> 1"
            if s.kind == "pop":
                return f"{name(s.var)} -> {fmt(s.word)}{name(s.var)}"
            return f"{name(s.var)} -> {name(s.word[0])}{name(s.new_var)}{name(s.var)}"
        return describe_endo(self.label, universe)


def describe_endo(h: Endo, universe: Universe | None = None,
                  source: Universe | None = None) -> str:
    """Render h; images are named through ``source`` when it is given."""
    if h.is_identity():
        return "id"
    source = source or universe
    parts = []
    for c, w in h.canonical_items():
        if universe is None:
            parts.append(f"{c}->{' '.join(map(str, w)) or '1'}")
        else:
            parts.append(f"{universe.name(c)}->{source.fmt(w) or '1'}")
    return ", ".join(parts)


def _alpha_apply(alpha: Mapping[int, tuple], word: Iterable[int]) -> tuple:
    out = []
    for s in word:
        w = alpha.get(s)
        if w is None:
            out.append(s)
        else:
            out.extend(w)
    return tuple(out)


def _sigma_apply(word: Iterable[int], sigma: Mapping[int, tuple]) -> tuple:
    out = []
    for s in word:
        if s < 0:
            out.extend(sigma[s])
        else:
            out.append(s)
    return tuple(out)


def check_forward(edge: Edge, W_src: Sequence[int], W_dst: Sequence[int],
                  sigma_src: Mapping, sigma_dst: Mapping, alpha: Mapping) -> bool:
    """alpha sigma(W) == alpha h sigma'(W') as words over A."""
    left = _alpha_apply(alpha, _sigma_apply(W_src, sigma_src))
    right = _alpha_apply(alpha, edge.label.apply(_sigma_apply(W_dst, sigma_dst)))
    return left == right


def validate_edge(src: ExtendedEquation, dst: ExtendedEquation, edge: Edge,
                  winit: ExtendedEquation | None = None, universe: Universe | None = None) -> list:
    """Violated edge conditions, as a list of strings (empty when valid)."""
    bad = []
    h = edge.label
    if edge.src != src.key or edge.dst != dst.key:
        bad.append("endpoint keys")
    if edge.kind == "substitution":
        if not h.is_identity():
            bad.append("substitution label is not the identity")
        if winit is not None and dst.W == winit.W and dst.X == winit.X and not dst.theta:
            bad.append("substitution into an initial state")
        if edge.spec is None:
            bad.append("substitution without spec")
        else:
            expect = apply_tau(src.W, edge.spec.tau())
            if not trace_eq(expect, dst.W, dst.theta):
                bad.append("W' is not tau(W)")
        return bad
    if not trace_eq(h.apply(dst.W), src.W, src.theta):
        bad.append("h(W') differs from W")
    for c in dst.B:
        if c == HASH:
            continue
        img = h(c)
        if any(s not in src.B for s in img):
            bad.append("image leaves B")
        if dst.mu_of(c) != src.mu_word(img):
            bad.append("mu not induced by h")
            break
    if edge.kind == "compression":
        if any(not 1 <= len(h(c)) <= 2 for c in dst.B):
            bad.append("|h(c)| outside 1..2")
        if not weight(dst) < weight(src):
            bad.append("weight does not decrease")
    else:
        if h.is_identity():
            bad.append("final label is the identity")
        if universe is not None:
            total = sum(len(h(c)) for c in dst.B if not universe.is_A(c))
            if total > len(src.W):
                bad.append("final label exceeds |W|")
    return bad
