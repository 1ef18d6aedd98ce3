"""Exploration of the strategy-conformant part of the NFA.

Each search node is a state paired with a control word that records where
in the round (preprocess, block compression, pair compression) the state
sits. ``expand`` returns, for one node, every admissible continuation as a
chain of edges together with the next control word. Intermediate states of a
chain are added to the graph but are not expanded on their own.

When a solution is known (witness mode) the same procedures run with an
advisor that keeps only the option consistent with it, and the solution is
transported along every edge.
"""

from __future__ import annotations

import copy
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .alphabet import (HASH, NF, ONE, LetterPool, Universe, bar, inv, mu0_word,
                       nf_inv, nf_mul, positive)
from .equation import (Bounds, ExtendedEquation, build_winit, blocks, check_B_solution,
                       close_assignment, ends_clash, is_final, refute, substitute, validate_state)
from .transitions import (IDENTITY, Edge, Endo, InvalidTransition, SubstitutionSpec, describe_endo,
                          _rewrite_pairs, apply_substitution, check_forward, compress,
                          final_compress, validate_edge)

log = logging.getLogger(__name__)

FINAL = ("final",)
ROUND = ("round",)


# ---------------------------------------------------------------- problem

@dataclass
class Problem:
    universe: Universe
    U: tuple
    V: tuple
    variables: tuple
    winit: ExtendedEquation
    bounds: Bounds
    mode: str = "monoid"
    report: tuple = ()
    nf_values: tuple = ()

    @property
    def seeds(self) -> list:
        return [self.universe.seed(i) for i in range(len(self.variables))]

    @property
    def trigger(self) -> int:
        if self.bounds.compress_above is not None:
            return self.bounds.compress_above
        occ = sum(1 for s in self.winit.W if s < 0)
        return len(self.winit.W) + 2 * occ


def realizable_values(universe: Universe) -> tuple:
    """ONE and every pair (x, y) that is mu of some nonempty reduced word."""
    letters = sorted(universe.A_pm)
    out = [ONE]
    for x in letters:
        for y in letters:
            if universe.k >= 2 or x == y:
                out.append(NF(x, y))
    return tuple(out)


def prepare(U: Sequence[int], V: Sequence[int], universe: Universe,
            variables: Sequence[int] | None = None, mode: str = "monoid",
            report: Sequence[int] | None = None, **bound_kw) -> Problem:
    U = tuple(U)
    V = tuple(V)
    if variables is None:
        seen = []
        for s in U + V:
            if s < 0 and positive(s) not in seen:
                seen.append(positive(s))
        variables = seen
    variables = tuple(variables)
    n = 2 * universe.k + 1 + len(U) + len(V)
    universe.resize(n)
    winit = build_winit(U, V, variables, universe)
    markers = winit.W.count(HASH)
    bounds = Bounds.for_equation(n, len(winit.W), markers, **bound_kw)
    return Problem(universe, U, V, variables, winit, bounds, mode,
                   tuple(report if report is not None else variables),
                   realizable_values(universe))


def initial_states(problem: Problem, budget: dict | None = None) -> Iterator[ExtendedEquation]:
    """Initial states, one per admissible mu_init, found by backtracking.

    A block pair is checked in full as soon as all its variables carry a
    value; before that its ends are compared up to the first unassigned
    variable. ``budget["nodes"]`` bounds the backtracking; running out sets
    ``budget["exhausted"]``.
    """
    W0 = problem.winit
    bl = blocks(W0.W)
    N = len(bl)
    pairs = [(bl[k], bar(bl[N - 1 - k])) for k in range((N + 1) // 2)]
    order = list(problem.variables)
    pos = {x: i for i, x in enumerate(order)}
    due = [[] for _ in order]
    early = [[] for _ in order]
    for u, v in pairs:
        vs = {positive(s) for s in u + v if s < 0}
        if not vs:
            if W0.mu_word(u) != W0.mu_word(v):
                return
            continue
        last = max(pos[x] for x in vs)
        due[last].append((u, v))
        for x in vs:
            if pos[x] < last:
                early[pos[x]].append((u, v))
    values = problem.nf_values
    mu: dict = {}
    limit = budget.get("nodes") if budget is not None else None
    visited = 0

    def mu_of(s):
        return mu.get(s) if s < 0 else W0.mu_of(s)

    def mu_word(w):
        acc = ONE
        for s in w:
            m = mu[s] if s < 0 else (W0.mu_of(s))
            acc = nf_mul(acc, m)
            if acc.first < 0:
                return acc
        return acc

    def go(i):
        nonlocal visited
        if i == len(order):
            s = ExtendedEquation(W0.W, W0.B, W0.X, {}, dict(mu))
            if refute(s) is None:
                yield s
            return
        x = order[i]
        for val in values:
            visited += 1
            if limit is not None and visited > limit:
                budget["exhausted"] = True
                return
            mu[x] = val
            mu[inv(x)] = nf_inv(val)
            if not all(mu_word(u) == mu_word(v) for u, v in due[i]):
                continue
            if any(ends_clash(u, v, mu_of) for u, v in early[i]):
                continue
            yield from go(i + 1)
            if budget is not None and budget.get("exhausted"):
                return
        mu.pop(x, None)
        mu.pop(inv(x), None)

    yield from go(0)


# ---------------------------------------------------------------- chains

class Know:
    """The solution (alpha, sigma) carried along in witness mode."""

    __slots__ = ("sigma", "alpha")

    def __init__(self, sigma: Mapping[int, tuple], alpha: Mapping[int, tuple]):
        self.sigma = dict(sigma)
        self.alpha = dict(alpha)

    def alpha_word(self, w) -> tuple:
        out = []
        for s in w:
            out.extend(self.alpha.get(s, (s,)))
        return tuple(out)


@dataclass
class Step:
    edge: Edge
    state: ExtendedEquation
    know: Know | None = None
    notes: tuple = ()
    names: tuple = ()


class Rejected(Exception):
    pass


class _Ctx:
    def __init__(self, problem: Problem, witness: bool = False):
        self.problem = problem
        self.universe = problem.universe
        self.bounds = problem.bounds
        self.A = problem.universe.A
        self.values = problem.nf_values
        self.trigger = problem.trigger
        self.witness = witness
        self.stats = {"invalid": 0, "rejected": 0, "refuted": 0}
        self.checked: set = set()
        self.last_names = dict(self.universe.const_names)
        self.pair_letters = 0


class _Chain:
    __slots__ = ("ctx", "state", "know", "steps", "notes")

    def __init__(self, ctx, state, know, steps=None, notes=None):
        self.ctx = ctx
        self.state = state
        self.know = know
        self.steps = steps if steps is not None else []
        self.notes = notes if notes is not None else []

    def fork(self) -> "_Chain":
        return _Chain(self.ctx, self.state, self.know, list(self.steps), list(self.notes))

    def note(self, text: str) -> None:
        if self.ctx.witness:
            self.notes.append(text)

    def _push(self, edge: Edge, t: ExtendedEquation, know: Know | None) -> bool:
        ctx = self.ctx
        if t.key not in ctx.checked:
            bad = validate_state(t, ctx.bounds, ctx.A)
            if bad:
                ctx.stats["invalid"] += 1
                if ctx.witness:
                    raise AssertionError(f"invalid state on witness path: {bad}")
                return False
            if know is None and refute(t) is not None:
                ctx.stats["refuted"] += 1
                return False
            ctx.checked.add(t.key)
        bad = validate_edge(self.state, t, edge, ctx.problem.winit, ctx.universe)
        if bad:
            raise AssertionError(f"invalid edge: {bad}")
        if know is not None:
            old = self.know
            if not check_forward(edge, self.state.W, t.W, old.sigma, know.sigma, old.alpha):
                raise AssertionError("forward property fails")
            if not check_B_solution(t, know.sigma):
                raise AssertionError("transported assignment is not a solution")
        names = ()
        if ctx.witness:
            after = dict(ctx.universe.const_names)
            names = (ctx.last_names, after)
            ctx.last_names = after
        self.steps.append(Step(edge, t, know, tuple(self.notes), names))
        self.notes = []
        self.state = t
        self.know = know
        return True

    # substitutions

    def subst(self, spec: SubstitutionSpec, mu: Mapping, sigma_new: Mapping | None = None) -> bool:
        try:
            t = apply_substitution(self.state, spec, mu)
        except InvalidTransition:
            self.ctx.stats["rejected"] += 1
            return False
        know = None
        if self.know is not None:
            sig = dict(self.know.sigma)
            X = spec.var
            if spec.kind == "erase":
                assert sig[X] == (), "erasing a variable with a nonempty value"
                del sig[X], sig[inv(X)]
            elif spec.kind == "pop":
                w = sig[X]
                u = tuple(spec.word)
                assert w[:len(u)] == u, "popped letters disagree with the solution"
                sig[X] = w[len(u):]
                sig[inv(X)] = bar(sig[X])
            else:
                sig.update(close_assignment(sigma_new))
            know = Know(sig, self.know.alpha)
        edge = Edge(self.state.key, t.key, IDENTITY, "substitution", spec)
        return self._push(edge, t, know)

    def erase(self, X: int) -> bool:
        return self.subst(SubstitutionSpec("erase", X), {})

    def pop(self, X: int, word: tuple, residual: NF) -> bool:
        if not self.subst(SubstitutionSpec("pop", X, tuple(word)), {X: residual}):
            return False
        if residual == ONE:
            return self.erase(X)
        return True

    # compressions

    def comp(self, h: Endo, B_new, W_new=None, theta_new=None,
             sigma_new: Mapping | None = None, kind: str = "compression") -> bool:
        s = self.state
        try:
            t = compress(s, h, B_new, self.ctx.A, W_new, theta_new, final=(kind != "compression"))
        except InvalidTransition:
            self.ctx.stats["rejected"] += 1
            return False
        know = None
        if self.know is not None:
            alpha = {c: self.know.alpha_word(h(c)) for c in t.B if c not in self.ctx.A}
            know = Know(close_assignment(sigma_new or {}), alpha)
        edge = Edge(s.key, t.key, h, kind)
        return self._push(edge, t, know)

    def pool(self) -> LetterPool:
        s = self.state
        return LetterPool(self.ctx.universe, s.B, s.X)


# ---------------------------------------------------------------- helpers

def _letters(s: ExtendedEquation) -> list:
    return sorted(x for x in s.B if x != HASH)


def _has_square(W) -> bool:
    return any(W[i] == W[i + 1] and W[i] > 0 for i in range(len(W) - 1))


def _expand(W, sigma):
    seq = []
    origin = []
    for i, s in enumerate(W):
        if s < 0:
            for k, t in enumerate(sigma[s]):
                seq.append(t)
                origin.append((i, k))
        else:
            seq.append(s)
            origin.append((i, -1))
    return seq, origin


def _collapse(W, origin, labels, variables) -> tuple:
    """Read W' and sigma' back from relabelled positions of sigma(W)."""
    W2 = list(W)
    per = {}
    for (i, k), lab in zip(origin, labels):
        if k < 0:
            W2[i] = lab
        else:
            per.setdefault(i, []).append(lab)
    sig = {}
    for i, s in enumerate(W):
        if s < 0:
            w = tuple(per.get(i, ()))
            if s in sig:
                assert sig[s] == w, "relabelling differs between occurrences"
            sig[s] = w
    for x in list(sig):
        if inv(x) in sig:
            assert sig[inv(x)] == bar(sig[x]), "relabelling breaks the involution"
    for x in variables:
        sig.setdefault(x, ())
    return tuple(W2), sig


def _runs(seq, skip_hash=True):
    """Maximal runs of one repeated constant, as (start, end, letter)."""
    out = []
    i = 0
    n = len(seq)
    while i < n:
        j = i + 1
        while j < n and seq[j] == seq[i]:
            j += 1
        if seq[i] > 0 or not skip_hash and seq[i] == 0:
            out.append((i, j, seq[i]))
        i = j
    return out


def _map_runs(word, members, f) -> tuple:
    """Apply f to each maximal segment of word over the symbols in members."""
    out = []
    cur = []
    for s in word:
        if s in members:
            cur.append(s)
            continue
        if cur:
            out.extend(f(tuple(cur)))
            cur = []
        out.append(s)
    if cur:
        out.extend(f(tuple(cur)))
    return tuple(out)


def _segments(word, members) -> list:
    segs = []
    cur = []
    for s in word:
        if s in members:
            cur.append(s)
        elif cur:
            segs.append(tuple(cur))
            cur = []
    if cur:
        segs.append(tuple(cur))
    return segs


def _next_var(s: ExtendedEquation, X: int | None):
    cands = [x for x in s.X if x == positive(x) and (X is None or x < X)]
    return max(cands) if cands else None


# ---------------------------------------------------------------- procedures

def _round(ctx, ch, ctl):
    s = ch.state
    if not s.X:
        if s.theta or s.W != bar(s.W):
            return
        m = len(ctx.problem.variables)
        if is_final(s, ctx.problem.seeds):
            yield ch, FINAL
            return
        c2 = ch.fork()
        try:
            t, h = final_compress(s, ctx.universe, m)
        except InvalidTransition:
            ctx.stats["rejected"] += 1
            return
        know = None
        if ch.know is not None:
            alpha = {c: ch.know.alpha_word(h(c)) for c in t.B if c not in ctx.A}
            know = Know({}, alpha)
        edge = Edge(s.key, t.key, h, "final-compression")
        if c2._push(edge, t, know):
            yield c2, FINAL
        return
    yield ch, ("pre", _next_var(s, None), "first")


def _pre(ctx, ch, ctl):
    _, X, stage = ctl
    s = ch.state
    if X is None:
        yield ch, ("post",)
        return
    if X not in s.X:
        yield ch, ("pre", _next_var(s, X), "first")
        return
    Y = X if stage == "first" else inv(X)
    nxt = ("pre", X, "last") if stage == "first" else ("pre", _next_var(s, X), "first")
    for c2 in _pop_first(ctx, ch, Y):
        if X in c2.state.X:
            yield c2, nxt
        else:
            yield c2, ("pre", _next_var(c2.state, X), "first")


def _pop_first(ctx, ch, Y):
    s = ch.state
    m = s.mu_of(Y)
    if m == ONE:
        c2 = ch.fork()
        if c2.erase(Y):
            yield c2
        return
    if ch.know is not None:
        w = ch.know.sigma[Y]
        opts = [(w[0], s.mu_word(w[1:]))]
    else:
        opts = []
        for f in _letters(s):
            mf = s.mu_of(f)
            if mf.first != m.first:
                continue
            for r in ctx.values:
                if nf_mul(mf, r) == m:
                    opts.append((f, r))
    for f, r in opts:
        c2 = ch.fork()
        if c2.pop(Y, (f,), r):
            yield c2


def _post(ctx, ch, ctl):
    s = ch.state
    if not s.X or len(s.W) <= ctx.trigger:
        yield ch, ROUND
    elif _has_square(s.W):
        yield ch, ("block0",)
    else:
        yield ch, ("pair0",)


# block compression ------------------------------------------------------

def _left_neighbours(W) -> dict:
    left = {}
    for i in range(1, len(W)):
        if W[i] < 0:
            left.setdefault(W[i], set()).add(W[i - 1])
    return {Y: next(iter(ps)) for Y, ps in left.items() if len(ps) == 1 and next(iter(ps)) > 0}


def _block0(ctx, ch, ctl):
    s = ch.state
    if s.theta or not _has_square(s.W):
        yield ch, ("pair0",)
        return
    if ch.know is not None:
        yield from _block_witness(ctx, ch)
        return
    W = s.W
    cand = _left_neighbours(W)
    order = sorted(cand, reverse=True)
    choices = []
    for Y in order:
        p = cand[Y]
        m = s.mu_of(Y)
        mp = s.mu_of(p)
        opts = []
        if m != ONE and m.first == mp.first and nf_mul(mp, mp).first >= 0:
            opts.append(True)
        if any(d not in (p, HASH) and s.mu_of(d).first == m.first for d in s.B):
            opts.append(False)
        choices.append(opts)
    for picks in itertools.product(*choices):
        split = {Y: v for Y, v in zip(order, picks)}
        yield from _block_free(ctx, ch, cand, split)


def _renamed_runs(W, cand, split):
    """Runs of W that belong to a block of length at least two."""
    out = []
    for i, j, b in _runs(W):
        if j - i >= 2 or (j < len(W) and W[j] < 0 and split.get(W[j]) and cand[W[j]] == b) \
                or (i > 0 and W[i - 1] < 0 and split.get(inv(W[i - 1])) and cand[inv(W[i - 1])] == inv(b)):
            out.append((i, j, b))
    return out


def _block_free(ctx, ch, cand, split):
    s = ch.state
    W = s.W
    runs = _renamed_runs(W, cand, split)
    if not runs:
        return
    pool = ch.pool()
    names = sorted({positive(b) for _, _, b in runs})
    ren = {}
    for b in names:
        mb = s.mu_of(b)
        if nf_mul(mb, mb).first < 0:
            return
        (c, cb), = pool.fresh_letters(1, [mb])
        ren[b] = c
        ren[inv(b)] = cb
    W1 = list(W)
    for i, j, b in runs:
        for k in range(i, j):
            W1[k] = ren[b]
    W1 = tuple(W1)
    # the split plan: residual guesses for every Y in X_b
    todo = [Y for Y in sorted(split, reverse=True) if split[Y]]
    plans = []
    for Y in todo:
        c = ren[cand[Y]]
        mc = s.mu_of(cand[Y])
        m = s.mu_of(Y)
        rest_ok = any(d not in (cand[Y], HASH) and s.mu_of(d).first == mc.first for d in s.B)
        opts = []
        for mY2 in (ONE, mc):
            for r in ctx.values:
                if nf_mul(nf_mul(mc, mY2), r) != m:
                    continue
                if r != ONE and r.first == mc.first and not rest_ok:
                    continue
                opts.append((mY2, r))
        plans.append(opts)
    for picks in itertools.product(*plans):
        yield from _block_plan(ctx, ch, pool, ren, W1, cand, todo, picks)


def _block_plan(ctx, ch, pool0, ren, W1, cand, todo, picks):
    s = ch.state
    # simulate the splits on a copy of the pool so letters come out identical
    erased = set()
    steps = []
    pool = LetterPool(ctx.universe, set(pool0.used), set(pool0.used_vars))
    Wsim = W1
    for Y, (mY2, r) in zip(todo, picks):
        if Y in erased:
            continue
        c = ren[cand[Y]]
        Y2, _ = pool.fresh_variable()
        steps.append((Y, c, Y2, mY2, r))
        img = (c,) + ((Y2,) if mY2 != ONE else ()) + ((Y,) if r != ONE else ())
        tau = {Y: img, inv(Y): bar(img)}
        Wsim = tuple(x for t in Wsim for x in (tau[t] if t in tau else (t,)))
        if r == ONE:
            erased.update((Y, inv(Y)))
    typed = {Y2: c for (_, c, Y2, mY2, _) in steps if mY2 != ONE}
    typed.update({inv(Y2): inv(c) for Y2, c in list(typed.items())})
    sigs_by_letter = {}
    for c in sorted(x for x in set(ren.values()) if x == positive(x)):
        members = {c} | {y for y, t in typed.items() if t == c}
        cb = inv(c)
        mmembers = {cb} | {y for y, t in typed.items() if t == cb}
        sigs = set()
        for seg in _segments(Wsim, members):
            sigs.add(_signature(seg, c))
        for seg in _segments(Wsim, mmembers):
            sigs.add(_signature(bar(seg), c))
        sigs_by_letter[c] = sorted(sigs)
    letters = sorted(sigs_by_letter)
    for parts in itertools.product(*(list(_partitions(sigs_by_letter[c])) for c in letters)):
        yield from _block_emit(ctx, ch, pool0, ren, W1, steps, letters, parts, sigs_by_letter)


def _signature(seg, c) -> tuple:
    return (sum(1 for x in seg if x == c), tuple(sorted(x for x in seg if x < 0)))


def _partitions(sigs):
    """Set partitions of the signatures that keep incompatible ones apart."""
    n = len(sigs)

    def ok(block, x):
        for y in block:
            if y[1] == x[1]:
                return False
        return True

    def go(i, acc):
        if i == n:
            yield tuple(tuple(b) for b in acc)
            return
        x = sigs[i]
        for b in acc:
            if ok(b, x):
                b.append(x)
                yield from go(i + 1, acc)
                b.pop()
        acc.append([x])
        yield from go(i + 1, acc)
        acc.pop()

    yield from go(0, [])


def _block_emit(ctx, ch, pool0, ren, W1, steps, letters, parts, sigs_by_letter):
    s = ch.state
    pool = LetterPool(ctx.universe, set(pool0.used), set(pool0.used_vars))
    cls = {}
    theta = {}
    h = {}
    rev = {v: k for k, v in ren.items()}
    for c in ren.values():
        h[c] = (rev[c],)
    for c, part in zip(letters, parts):
        mc = s.mu_of(rev[c])
        for blk in part:
            (k, kb), = pool.fresh_letters(1, [mc])
            theta[k] = c
            theta[kb] = inv(c)
            h[k] = (rev[c],)
            for sig in blk:
                cls[(c, sig)] = k
    B1 = set(s.B) | set(pool.used)
    c2 = ch.fork()
    if not c2.comp(Endo(h), B1, W1, theta):
        return
    # splits; the fresh variables are allocated in the same order as planned
    for Y, c, Y2, mY2, r in steps:
        if Y not in c2.state.X:
            continue
        if not c2.subst(SubstitutionSpec("split", Y, (c,), Y2), {Y2: mY2, Y: r}):
            return
        if mY2 == ONE and not c2.erase(Y2):
            return
        if r == ONE and not c2.erase(Y):
            return
    if not _mark(ctx, c2, letters, cls):
        return
    yield c2, ("loop",)


def _mark(ctx, c2, letters, cls, sigma_new=None) -> bool:
    s = c2.state
    th = s.theta
    W = s.W
    kappas = {}
    out = W
    for c in letters:
        members = {c} | {y for y in s.X if th.get(y) == c}
        mmembers = {inv(c)} | {y for y in s.X if th.get(y) == inv(c)}
        bad = []

        def mark(seg, c=c):
            k = cls.get((c, _signature(seg, c)))
            if k is None or c not in seg:
                bad.append(seg)
                return seg
            kappas[k] = c
            i = seg.index(c)
            return (k,) + seg[:i] + seg[i + 1:]

        def mmark(seg, c=c):
            return bar(mark(bar(seg)))

        out = _map_runs(out, members, mark)
        out = _map_runs(out, mmembers, mmark)
        if bad:
            return False
    h = Endo({k: (c,) for k, c in kappas.items()})
    if h.is_identity():
        return False
    return c2.comp(h, s.B, out, th, sigma_new)


def _front_mark(marks):
    def f(seg):
        ks = [x for x in seg if x in marks]
        if len(ks) != 1:
            return seg
        return (ks[0],) + tuple(x for x in seg if x not in marks)
    return f


def _block_witness(ctx, ch):
    """Block compression driven by the known solution."""
    s = ch.state
    know = ch.know
    W = s.W
    cand = _left_neighbours(W)
    seq, origin = _expand(W, know.sigma)
    lam = {}
    for i, j, b in _runs(seq):
        if j - i >= 2 and any(origin[k][1] < 0 for k in range(i, j)):
            lam.setdefault(b, set()).add(j - i)
    xb = {}
    for Y, p in cand.items():
        if know.sigma[Y] and know.sigma[Y][0] == p:
            xb.setdefault(p, []).append(Y)
    for b in sorted(lam):
        if b == positive(b):
            ch.note(f"Lambda_{ctx.universe.name(b)} = {{{', '.join(map(str, sorted(lam[b])))}}}")
    for b in sorted(ctx.universe.A_plus):
        if b not in lam:
            ch.note(f"Lambda_{ctx.universe.name(b)} = {{}}")
    for b in sorted(xb):
        names = ", ".join(ctx.universe.name(y) for y in sorted(xb[b], reverse=True))
        ch.note(f"X_{ctx.universe.name(b)} = {{{names}}}")
    pool = ch.pool()
    ren = {}
    for b in sorted({positive(b) for b in lam}):
        (c, cb), = pool.fresh_letters(1, [s.mu_of(b)])
        ren[b] = c
        ren[inv(b)] = cb
    cls = {}
    theta = {}
    h = {}
    for b, c in ren.items():
        h[c] = (b,)
    for b in sorted(ren):
        if b != positive(b):
            continue
        for l in sorted(lam[b]):
            (k, kb), = pool.fresh_letters(1, [s.mu_of(b)])
            cls[(ren[b], l)] = k
            theta[k] = ren[b]
            theta[kb] = inv(ren[b])
            h[k] = (b,)
            ctx.universe.const_names[k] = f"c{l}{ctx.universe.name(b)}"
        ctx.universe.const_names[ren[b]] = f"c{ctx.universe.name(b)}"
    labels = list(seq)
    for i, j, b in _runs(seq):
        if b in lam or inv(b) in lam:
            ls = lam.get(b) or lam.get(inv(b))
            if j - i in ls:
                for k in range(i, j):
                    labels[k] = ren[b]
    W1, sig1 = _collapse(W, origin, labels, s.X)
    B1 = set(s.B) | set(pool.used)
    c2 = ch.fork()
    if not c2.comp(Endo(h), B1, W1, theta, sig1):
        raise AssertionError("renaming step rejected on witness path")
    # splits
    for Y in sorted(cand, reverse=True):
        if Y not in c2.state.X:
            continue
        p = cand[Y]
        if not (know.sigma[Y] and know.sigma[Y][0] == p):
            continue
        c = ren[p]
        w = c2.know.sigma[Y]
        l = 0
        while l < len(w) and w[l] == c:
            l += 1
        Y2, _ = c2.pool().fresh_variable()
        mc = c2.state.mu_of(c)
        mY2 = ONE if l == 1 else mc
        r = c2.state.mu_word(w[l:])
        sig = {Y2: (c,) * (l - 1), Y: w[l:]}
        if not c2.subst(SubstitutionSpec("split", Y, (c,), Y2), {Y2: mY2, Y: r}, sig):
            raise AssertionError("split rejected on witness path")
        if mY2 == ONE:
            c2.erase(Y2)
        if r == ONE:
            c2.erase(Y)
    # marking, leftmost visible position of each block, else its first position
    t = c2.state
    seq, origin = _expand(t.W, c2.know.sigma)
    labels = list(seq)
    typed_letters = set(ren.values())
    for i, j, b in _runs(seq):
        if b not in typed_letters:
            continue
        c = b if b == positive(b) else inv(b)
        k = cls[(c, j - i)]
        vis = [q for q in range(i, j) if origin[q][1] < 0]
        if b == c:
            q = vis[0] if vis else i
            labels[q] = k
        else:
            q = vis[-1] if vis else j - 1
            labels[q] = inv(k)
    W2, sig2 = _collapse(t.W, origin, labels, t.X)
    # class letters go to the front of their c-segment, mirrors to the back,
    # so that each marked block and its mirror agree around typed variables
    marks = set(cls.values())
    for c in sorted(set(ren.values())):
        if c != positive(c):
            continue
        typed = {y for y in t.X if t.theta.get(y) == c}
        members = {c} | typed | {k for (d, _), k in cls.items() if d == c}
        W2 = _map_runs(W2, members, _front_mark(marks))
        W2 = _map_runs(W2, {inv(x) for x in members},
                       lambda seg: bar(_front_mark(marks)(bar(seg))))
    kap = {k: (c,) for (c, _), k in cls.items()}
    h2 = Endo(kap)
    if not c2.comp(h2, t.B, W2, t.theta, {x: w for x, w in sig2.items()}):
        raise AssertionError("marking rejected on witness path")
    yield c2, ("loop",)


# the inner loop ---------------------------------------------------------

def _loop(ctx, ch, ctl):
    s = ch.state
    if not s.theta:
        yield ch, ("pair0",)
        return
    c = min(positive(t) for t in s.theta.values())
    typed = sorted((x for x in s.X if s.theta.get(x) == c), reverse=True)
    mc = s.mu_of(c)
    if ch.know is not None:
        opts = []
        for Y in typed:
            j = len(ch.know.sigma[Y])
            opts.append(["even"] if j % 2 == 0 else [("odd", ONE if j == 1 else mc)])
    else:
        opts = [["even", ("odd", ONE), ("odd", mc)] for _ in typed]
    for picks in itertools.product(*opts):
        c2 = ch.fork()
        ok = True
        for Y, pk in zip(typed, picks):
            if pk != "even" and not c2.pop(Y, (c,), pk[1]):
                ok = False
                break
        if ok:
            yield from _loop_rest(ctx, c2, c)


def _classes(s, c):
    return {x for x in s.B if s.theta.get(x) == c}


def _loop_rest(ctx, ch, c):
    s = ch.state
    cb = inv(c)
    kap = _classes(s, c)
    typed_c = {x for x in s.X if s.theta.get(x) == c}
    typed_cb = {inv(x) for x in typed_c}
    members = {c} | kap | typed_c
    mmembers = {cb} | {inv(k) for k in kap} | typed_cb
    parity = {}
    for seg in _segments(s.W, members) + [bar(x) for x in _segments(s.W, mmembers)]:
        ks = [x for x in seg if x in kap]
        if len(ks) != 1:
            return
        p = sum(1 for x in seg if x == c) % 2
        if parity.setdefault(ks[0], p) != p:
            return
    odd = sorted(k for k, p in parity.items() if p)
    know = ch.know
    if odd:
        oddset = set(odd)

        def drop(seg):
            if not any(x in oddset for x in seg):
                return seg
            i = seg.index(c)
            return seg[:i] + seg[i + 1:]

        def mdrop(seg):
            return bar(drop(bar(seg)))

        W2 = _map_runs(_map_runs(s.W, members, drop), mmembers, mdrop)
        B2 = set(s.B)
        th2 = dict(s.theta)
        gone = c not in W2 and cb not in W2 and not typed_c
        if gone:
            B2 -= {c, cb}
            th2 = {x: t for x, t in th2.items() if t not in (c, cb)}
        sig2 = None
        if know is not None:
            sig2 = {}
            for x, w in know.sigma.items():
                if x == positive(x):
                    if s.theta.get(x) is None:
                        w = _map_runs(_map_runs(w, {c} | kap, drop), {cb} | {inv(k) for k in kap}, mdrop)
                    sig2[x] = w
            if gone:
                assert all(c not in w and cb not in w for w in sig2.values()), "type letter survives"
        h = Endo({k: (c, k) for k in odd})
        if not ch.comp(h, B2, W2, th2, sig2):
            return
        if gone:
            yield ch, ("loop",)
            return
    s = ch.state
    typed_c = sorted((x for x in s.X if s.theta.get(x) == c), reverse=True)
    mc = s.mu_of(c)
    if know is not None:
        opts = [[ONE if len(ch.know.sigma[Y]) == 2 else mc] for Y in typed_c]
    else:
        opts = [[ONE, mc] for _ in typed_c]
    for picks in itertools.product(*opts):
        c2 = ch.fork()
        if all(c2.pop(Y, (c, c), r) for Y, r in zip(typed_c, picks)):
            out = _halve(ctx, c2, c)
            if out is not None:
                yield out


def _halve(ctx, ch, c):
    s = ch.state
    cb = inv(c)
    if c not in s.W:
        return None
    kap = _classes(s, c)
    typed_c = {x for x in s.X if s.theta.get(x) == c}
    members = {c} | kap | typed_c
    mmembers = {cb} | {inv(k) for k in kap} | {inv(x) for x in typed_c}
    bad = []

    def half(seg):
        n = sum(1 for x in seg if x == c)
        if n % 2:
            bad.append(seg)
            return seg
        rest = tuple(x for x in seg if x != c)
        return rest + (c,) * (n // 2)

    def mhalf(seg):
        return bar(half(bar(seg)))

    W2 = _map_runs(_map_runs(s.W, members, half), mmembers, mhalf)
    if bad:
        return None
    sig2 = None
    if ch.know is not None:
        sig2 = {}
        for x, w in ch.know.sigma.items():
            if x == positive(x):
                if s.theta.get(x) == c:
                    assert len(w) % 2 == 0
                    w = w[: len(w) // 2]
                elif s.theta.get(x) == cb:
                    w = w[: len(w) // 2]
                elif s.theta.get(x) is None:
                    w = _map_runs(_map_runs(w, {c} | kap, half), {cb} | {inv(k) for k in kap}, mhalf)
                sig2[x] = w
        if bad:
            raise AssertionError("odd block in the solution")
    if not ch.comp(Endo({c: (c, c)}), s.B, W2, s.theta, sig2):
        return None
    return ch, ("loop",)


# pair compression -------------------------------------------------------

def _lr_count(W, Lset, s) -> int:
    n = 0
    for i in range(len(W) - 1):
        a, b = W[i], W[i + 1]
        if a in Lset and b > 0 and b not in Lset and b != inv(a) and s.mu_word((a, b)).first >= 0:
            n += 1
    return n


def _pair0(ctx, ch, ctl):
    s = ch.state
    if not s.X:
        yield ch, ROUND
        return
    keep = set(ctx.A)
    for x in s.W:
        if x > 0:
            keep.update((x, inv(x)))
    c2 = ch.fork()
    if keep != set(s.B):
        sig = None
        if ch.know is not None:
            beta = {x: ch.know.alpha[x] for x in s.B if x not in keep}
            sig = {x: _apply_map(w, beta) for x, w in ch.know.sigma.items()}
        if not c2.comp(IDENTITY, keep, s.W, {}, sig):
            return
        s = c2.state
    pos = sorted(positive(x) for x in s.B if x != HASH and x == positive(x))
    parts = []
    for bits in itertools.product((0, 1), repeat=len(pos)):
        L = tuple(sorted(x if bit else inv(x) for x, bit in zip(pos, bits)))
        parts.append(L)
    if c2.know is not None:
        seq, origin = _expand(s.W, c2.know.sigma)
        scored = []
        for L in parts:
            Lset = set(L)
            n = 0
            for i in range(len(seq) - 1):
                a, b = seq[i], seq[i + 1]
                if a in Lset and b > 0 and b not in Lset and b != inv(a) \
                        and (origin[i][1] < 0 or origin[i + 1][1] < 0):
                    n += 1
            scored.append((-n, L))
        scored.sort()
        best = scored[0][1]
        c2.note("partition L = {" + ", ".join(ctx.universe.name(x) for x in _display_order(best)) + "}"
                f" with {-scored[0][0]} pairs")
        c2.note("partition candidates: " + "; ".join(
            "{" + ", ".join(ctx.universe.name(x) for x in _display_order(L)) + f"}}:{-n}"
            for n, L in scored[:6]))
        yield c2, ("unc", best, tuple(sorted(s.X, reverse=True)))
        return
    scored = []
    for L in parts:
        Lset = set(L)
        n = _lr_count(s.W, Lset, s)
        if n == 0:
            R = [x for x in s.B if x > 0 and x not in Lset]
            if not any(s.mu_of(r).first == s.mu_of(Y).first for Y in s.X for r in R):
                continue
        scored.append((-n, L))
    scored.sort()
    if ctx.bounds.partition_limit is not None:
        scored = scored[: ctx.bounds.partition_limit]
    for _, L in scored:
        yield c2, ("unc", L, tuple(sorted(s.X, reverse=True)))


def _display_order(L):
    return sorted(L, key=lambda x: (positive(x), x))


def _apply_map(w, m) -> tuple:
    out = []
    for x in w:
        out.extend(m.get(x, (x,)))
    return tuple(out)


def _unc(ctx, ch, ctl):
    _, L, todo = ctl
    if not todo:
        yield ch, ("pc", L)
        return
    Y, rest = todo[0], todo[1:]
    s = ch.state
    if Y not in s.X:
        yield ch, ("unc", L, rest)
        return
    Lset = set(L)
    R = sorted(x for x in s.B if x > 0 and x not in Lset)
    m = s.mu_of(Y)
    if ch.know is not None:
        w = ch.know.sigma[Y]
        if w[0] in Lset:
            opts = [None]
        else:
            opts = [(w[0], s.mu_word(w[1:]))]
            ch.note(f"uncross {ctx.universe.name(Y)}")
    else:
        opts = []
        if any(x in Lset and s.mu_of(x).first == m.first for x in s.B):
            opts.append(None)
        for r in R:
            mr = s.mu_of(r)
            if mr.first != m.first:
                continue
            for v in ctx.values:
                if nf_mul(mr, v) == m:
                    opts.append((r, v))
    for o in opts:
        if o is None:
            yield ch, ("unc", L, rest)
            continue
        c2 = ch.fork()
        if c2.pop(Y, (o[0],), o[1]):
            yield c2, ("unc", L, rest)


def _pc(ctx, ch, ctl):
    _, L = ctl
    s = ch.state
    Lset = set(L)
    W = s.W
    pairs = []
    seen = set()
    for i in range(len(W) - 1):
        a, b = W[i], W[i + 1]
        if a in Lset and b > 0 and b not in Lset and b != inv(a) and s.mu_word((a, b)).first >= 0:
            if (a, b) not in seen:
                seen.add((a, b))
                pairs.append((a, b))
    pairs.sort()
    todo = []
    done = set()
    for a, b in pairs:
        if (a, b) in done:
            continue
        done.update(((a, b), (inv(b), inv(a))))
        todo.append((a, b))
    if not todo:
        return
    c2 = ch.fork()
    for idx, (a, b) in enumerate(todo):
        s = c2.state
        pool = c2.pool()
        (c, cb), = pool.fresh_letters(1, [s.mu_word((a, b))])
        h = Endo({c: (a, b)})
        B2 = set(s.B) | {c, cb}
        W2 = _rewrite_pairs(s.W, h, B2)
        sig = None
        if c2.know is not None:
            sig = {x: _rewrite_pairs(w, h, B2) for x, w in c2.know.sigma.items() if x == positive(x)}
        if ctx.witness:
            ctx.pair_letters += 1
            ctx.universe.const_names[c] = f"p{ctx.pair_letters}"
        if idx < len(todo) - 1:
            if not c2.comp(h, B2, W2, {}, sig):
                return
            continue
        # fold alphabet reduction and canonical renaming into the last edge
        keep = set(ctx.A)
        for x in W2:
            if x > 0:
                keep.update((x, inv(x)))
        pi = _canonical_renaming(W2, ctx.universe)
        pinv = {v: k for k, v in pi.items()}
        W3 = tuple(pi.get(x, x) if x >= 0 else x for x in W2)
        B3 = set(ctx.A) | {pi.get(x, x) for x in keep}
        g = {}
        for x in B3:
            if x in ctx.A:
                continue
            g[x] = h.apply((pinv.get(x, x),))
        sig3 = None
        if sig is not None:
            sig3 = {x: tuple(pi.get(y, y) for y in w) for x, w in sig.items()}
            _rename_display(ctx.universe, pi)
        if not c2.comp(Endo(g), B3, W3, {}, sig3):
            return
    yield c2, ROUND


def _rename_display(universe, pi) -> None:
    # trace output only: carry readable names across the renaming
    old = universe.const_names
    universe.const_names = {pi[x]: old[x] for x in pi
                            if x == positive(x) and x in old and pi[x] == positive(pi[x])}


def _canonical_renaming(W, universe) -> dict:
    pi = {}
    nxt = universe.first_fresh
    for x in W:
        if x <= 0 or universe.is_A(x) or x in pi:
            continue
        pi[positive(x)] = nxt
        pi[inv(positive(x))] = nxt + 1
        nxt += 2
    return pi


_PROCS = {
    "round": _round,
    "pre": _pre,
    "post": _post,
    "block0": _block0,
    "loop": _loop,
    "pair0": _pair0,
    "unc": _unc,
    "pc": _pc,
}


def expand(ctx: _Ctx, state: ExtendedEquation, ctl: tuple, know: Know | None = None) -> list:
    """All continuations of one search node as (chain, next control) pairs."""
    ch = _Chain(ctx, state, know)
    return [(c.steps, nxt, c) for c, nxt in _PROCS[ctl[0]](ctx, ch, ctl)]


# ---------------------------------------------------------------- the graph

@dataclass
class PartialNfa:
    problem: Problem
    states: dict = field(default_factory=dict)
    edges: set = field(default_factory=set)
    initials: set = field(default_factory=set)
    finals: set = field(default_factory=set)
    status: str = "complete"
    stats: dict = field(default_factory=dict)

    def out_edges(self) -> dict:
        out = {k: [] for k in self.states}
        for e in self.edges:
            out[e.src].append(e)
        for v in out.values():
            v.sort(key=_edge_sort_key)
        return out

    def in_edges(self) -> dict:
        out = {k: [] for k in self.states}
        for e in self.edges:
            out[e.dst].append(e)
        for v in out.values():
            v.sort(key=_edge_sort_key)
        return out

    def is_empty(self) -> bool:
        return not self.states


def _edge_sort_key(e: Edge):
    return (e.src, e.dst, e.kind, e.label.items(), e.spec or ())


def explore(problem: Problem, bounds: Bounds | None = None, progress=None) -> PartialNfa:
    """Breadth-first construction of the reachable strategy graph."""
    if bounds is not None:
        problem.bounds = bounds
    ctx = _Ctx(problem)
    b = problem.bounds
    nfa = PartialNfa(problem)
    seen = set()
    queue = deque()
    budget = {"nodes": 20 * b.max_states}
    for s in initial_states(problem, budget):
        nfa.states[s.key] = s
        nfa.initials.add(s.key)
        node = (s.key, ROUND)
        seen.add(node)
        queue.append((s, ROUND, 0))
        if len(nfa.states) > b.max_states:
            nfa.status = "capped"
            break
    if budget.get("exhausted"):
        nfa.status = "capped"
    expanded = 0
    while queue and nfa.status == "complete":
        s, ctl, depth = queue.popleft()
        if depth >= b.max_depth:
            nfa.status = "capped"
            break
        expanded += 1
        for steps, nxt, _ in expand(ctx, s, ctl):
            cur = s
            for st in steps:
                nfa.states.setdefault(st.state.key, st.state)
                nfa.edges.add(st.edge)
                cur = st.state
            if nxt == FINAL:
                nfa.finals.add(cur.key)
                continue
            node = (cur.key, nxt)
            if node in seen:
                continue
            seen.add(node)
            queue.append((cur, nxt, depth + max(1, len(steps))))
        if len(nfa.states) > b.max_states:
            nfa.status = "capped"
        if progress is not None and expanded % 1000 == 0:
            progress(f"nodes {expanded} states {len(nfa.states)} edges {len(nfa.edges)}")
    nfa.stats = dict(ctx.stats, nodes=expanded, states=len(nfa.states), edges=len(nfa.edges))
    log.debug("explore: %s", nfa.stats)
    return nfa


def trim(nfa: PartialNfa) -> PartialNfa:
    out = nfa.out_edges()
    inn = nfa.in_edges()
    fwd = set(k for k in nfa.initials if k in nfa.states)
    todo = list(fwd)
    while todo:
        k = todo.pop()
        for e in out[k]:
            if e.dst not in fwd:
                fwd.add(e.dst)
                todo.append(e.dst)
    bwd = set(k for k in nfa.finals if k in nfa.states)
    todo = list(bwd)
    while todo:
        k = todo.pop()
        for e in inn[k]:
            if e.src not in bwd:
                bwd.add(e.src)
                todo.append(e.src)
    keep = fwd & bwd
    t = PartialNfa(nfa.problem, {k: v for k, v in nfa.states.items() if k in keep},
                   {e for e in nfa.edges if e.src in keep and e.dst in keep},
                   nfa.initials & keep, nfa.finals & keep, nfa.status, dict(nfa.stats))
    return t


def has_cycle(nfa: PartialNfa) -> bool:
    out = nfa.out_edges()
    color = dict.fromkeys(nfa.states, 0)
    for root in sorted(nfa.states):
        if color[root]:
            continue
        stack = [(root, iter(out[root]))]
        color[root] = 1
        while stack:
            k, it = stack[-1]
            e = next(it, None)
            if e is None:
                color[k] = 2
                stack.pop()
                continue
            d = e.dst
            if color[d] == 1:
                return True
            if color[d] == 0:
                color[d] = 1
                stack.append((d, iter(out[d])))
    return False


# ---------------------------------------------------------------- witness

@dataclass
class TraceStep:
    index: int
    edge: Edge
    state: ExtendedEquation
    sigma: dict
    notes: tuple
    summary: str = ""
    display: str = ""


@dataclass
class WitnessTrace:
    problem: Problem
    initial: ExtendedEquation
    steps: list
    notes: list

    def labels(self) -> list:
        return [st.edge.label for st in self.steps]


def witness_trace(problem: Problem, sigma: Mapping[int, Sequence[int]],
                  max_steps: int = 100_000) -> WitnessTrace:
    """Replay the strategy for a known solution, checking every edge."""
    if problem.mode != "monoid":
        raise ValueError("witness tracing works on monoid equations")
    sig = {}
    for x in problem.variables:
        if x not in sigma:
            raise ValueError(f"no value for {problem.universe.name(x)}")
        w = tuple(sigma[x])
        if any(s <= 0 or not problem.universe.is_A(s) for s in w):
            raise ValueError("values must be words over the input letters")
        if mu0_word(w).first < 0:
            raise ValueError(f"value of {problem.universe.name(x)} is not reduced")
        sig[x] = w
    sig = close_assignment(sig)
    if substitute(problem.U, sig) != substitute(problem.V, sig):
        raise ValueError("the assignment does not solve the equation")
    mu = {x: mu0_word(w) for x, w in sig.items()}
    s0 = ExtendedEquation(problem.winit.W, problem.winit.B, problem.winit.X, {}, mu)
    ctx = _Ctx(problem, witness=True)
    saved = dict(problem.universe.const_names)
    try:
        return _replay(problem, ctx, s0, sig, max_steps)
    finally:
        problem.universe.const_names = saved


def _named(universe: Universe, names: dict) -> Universe:
    u = copy.copy(universe)
    u.const_names = names
    return u


def _replay(problem, ctx, s0, sig, max_steps) -> WitnessTrace:
    know = Know(sig, {})
    assert check_B_solution(s0, sig)
    state, ctl = s0, ROUND
    steps = []
    notes = []
    guard = 0
    while ctl != FINAL:
        guard += 1
        if guard > max_steps:
            raise RuntimeError("witness trace did not terminate")
        opts = expand(ctx, state, ctl, know)
        if len(opts) != 1:
            raise AssertionError(f"witness mode produced {len(opts)} continuations at {ctl[0]}")
        chain, nxt, c = opts[0]
        for st in chain:
            before, after = (_named(problem.universe, n) for n in st.names)
            if st.edge.kind == "final-compression":
                # seed letters reuse indices of earlier fresh letters
                fresh = {positive(c) for c in st.state.B}
                after = _named(problem.universe,
                               {k: v for k, v in st.names[1].items() if k not in fresh})
            if st.edge.kind == "substitution":
                summary = st.edge.describe(after)
            else:
                summary = describe_endo(st.edge.label, after, before)
            steps.append(TraceStep(len(steps) + 1, st.edge, st.state, dict(st.know.sigma),
                                   st.notes, summary, after.fmt(st.state.W, " ")))
            notes.extend(st.notes)
        if c.notes:
            notes.extend(c.notes)
            if steps:
                steps[-1].notes = steps[-1].notes + tuple(c.notes)
        state, know, ctl = c.state, c.know, nxt
    return WitnessTrace(problem, s0, steps, notes)
