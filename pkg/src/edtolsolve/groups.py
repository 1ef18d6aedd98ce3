"""Free-group front end.

A group equation is turned into a system of monoid equations whose reduced
solutions, restricted to the original variables, are exactly the group
solutions. The steps are free reduction, binding the right side to a single
atom, triangulation into products ``x y = z``, and the Cayley-tree split
``x = P R``, ``y = inv(R) Q``, ``z = P Q``. The system is then joined with
``#`` into one equation.

An atom is either a variable or a maximal run of constants. Using constant
runs as atoms keeps the number of fresh variables low; the length bound still
holds since every input symbol lands in exactly one triangle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .alphabet import HASH, Universe, bar, inv, is_var, positive


def free_reduce(word: Sequence[int]) -> tuple:
    out = []
    for s in word:
        if out and out[-1] == inv(s) and s != HASH:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


@dataclass
class GroupEquation:
    U: tuple
    V: tuple
    variables: tuple

    def __post_init__(self):
        self.U = tuple(self.U)
        self.V = tuple(self.V)
        if HASH in self.U or HASH in self.V:
            raise ValueError("# may not occur in a group equation")


@dataclass(frozen=True)
class Triangle:
    """The equation x y = z over atoms; an empty atom stands for 1."""
    x: tuple
    y: tuple
    z: tuple


@dataclass
class Encoding:
    U: tuple
    V: tuple
    variables: tuple
    report: tuple
    equations: list = field(default_factory=list)
    triangles: list = field(default_factory=list)
    components: list = field(default_factory=list)


class FreshVariables:
    """Allocates fresh variables with readable, collision-free names."""

    def __init__(self, universe: Universe, taken: Sequence[int]):
        self.universe = universe
        used = {positive(x) for x in taken if is_var(x)}
        used |= {positive(x) for x in universe.var_names}
        self.next = min(used, default=1) - 2 if used else -1
        self.names = set(universe.var_names.values())
        self.counters: dict = {}
        self.created: list = []

    def new(self, prefix: str) -> int:
        x = self.next
        self.next -= 2
        i = self.counters.get(prefix, 0)
        while True:
            i += 1
            name = f"{prefix}{i}"
            if name not in self.names:
                break
        self.counters[prefix] = i
        self.names.add(name)
        self.universe.var_names[x] = name
        self.created.append(x)
        return x


def atoms(word: Sequence[int]) -> list:
    out = []
    run = []
    for s in word:
        if is_var(s):
            if run:
                out.append(tuple(run))
                run = []
            out.append((s,))
        else:
            run.append(s)
    if run:
        out.append(tuple(run))
    return out


def _join(parts) -> tuple:
    return tuple(s for p in parts for s in p)


def triangulate(U: Sequence[int], V: Sequence[int], fresh: FreshVariables) -> list:
    """Triangles equivalent to U = V over the original and fresh variables."""
    U = free_reduce(U)
    V = free_reduce(V)
    left, right = atoms(U), atoms(V)
    if len(left) <= 1 and len(right) > 1:
        left, right = right, left
    if len(right) <= 1:
        return _chain(left, right[0] if right else (), fresh)
    z = (fresh.new("Z"),)
    return _chain(left, z, fresh) + _chain(right, z, fresh)


def _chain(parts: list, target: tuple, fresh: FreshVariables) -> list:
    out = []
    parts = list(parts)
    while len(parts) > 2:
        t = (fresh.new("T"),)
        out.append(Triangle(t, parts[-1], target))
        parts.pop()
        target = t
    while len(parts) < 2:
        parts.append(())
    out.append(Triangle(parts[0], parts[1], target))
    out.reverse()
    return out


def caytree_split(t: Triangle, fresh: FreshVariables) -> list:
    """The three monoid equations x = PR, y = inv(R)Q, z = PQ."""
    P, Q, R = (fresh.new(p) for p in "PQR")
    return [(t.x, (P, R)), (t.y, (inv(R), Q)), (t.z, (P, Q))]


def _constant(a: tuple) -> bool:
    return not any(is_var(s) for s in a)


def monoid_equations(t: Triangle, fresh: FreshVariables) -> list:
    """Monoid equations for one triangle, skipping the split when it is forced."""
    x, y, z = t.x, t.y, t.z
    if _constant(x) and _constant(y):
        return [(z, free_reduce(x + y))]
    if _constant(x) and _constant(z):
        return [(y, free_reduce(bar(x) + z))]
    if _constant(y) and _constant(z):
        return [(x, free_reduce(z + bar(y)))]
    if not x:
        return [(y, z)]
    if not y:
        return [(x, z)]
    if not z:
        return [(x, bar(y))]
    return caytree_split(t, fresh)


def encode_system(eqs: Sequence[tuple]) -> tuple:
    """Join (U_i, V_i) into (U_1 # ... # U_s, V_1 # ... # V_s)."""
    U, V = [], []
    for i, (u, v) in enumerate(eqs):
        if i:
            U.append(HASH)
            V.append(HASH)
        U.extend(u)
        V.extend(v)
    return tuple(U), tuple(V)


def encode(eq, universe: Universe, presolve_limit: int = 64) -> Encoding:
    """Encode one group equation, or a list of them sharing variables."""
    system = list(eq) if isinstance(eq, (list, tuple)) else [eq]
    report = tuple(dict.fromkeys(x for e in system for x in e.variables))
    taken = tuple(s for e in system for s in e.U + e.V + tuple(e.variables))
    fresh = FreshVariables(universe, taken)
    tris = []
    for e in system:
        tris += triangulate(e.U, e.V, fresh)
    eqs = []
    for t in tris:
        for u, v in monoid_equations(t, fresh):
            if u != v:
                eqs.append((u, v))
    U2, V2 = encode_system(eqs)
    n = sum(len(e.U) + len(e.V) for e in system)
    if len(U2) + len(V2) > 15 * max(n, 1):
        raise AssertionError(f"encoding has length {len(U2) + len(V2)} > 15 * {n}")
    variables = list(report)
    present = {positive(s) for s in U2 + V2 if is_var(s)}
    variables += [x for x in fresh.created if x in present]
    enc = Encoding(U2, V2, tuple(variables), report, eqs, tris)
    for comp in presolve(eqs, report, presolve_limit):
        U3, V3 = encode_system(comp.equations)
        enc.components.append((U3, V3, component_variables(comp, variables), comp.outputs))
    return enc


# ------------------------------------------------------------ presolving
#
# Only the original variables are reported, so auxiliary ones may be
# substituted away: the split identities hold in the group for arbitrary
# words, and any reduced solution of the full system still solves the
# smaller one.

class Infeasible(Exception):
    pass


def _subst(word, var, value) -> tuple:
    out = []
    for s in word:
        if s == var:
            out.extend(value)
        elif s == inv(var):
            out.extend(bar(value))
        else:
            out.append(s)
    return tuple(out)


def _strip(u: tuple, v: tuple):
    while u and v and not is_var(u[0]) and not is_var(v[0]):
        if u[0] != v[0]:
            raise Infeasible
        u, v = u[1:], v[1:]
    while u and v and not is_var(u[-1]) and not is_var(v[-1]):
        if u[-1] != v[-1]:
            raise Infeasible
        u, v = u[:-1], v[:-1]
    for a, b in ((u, v), (v, u)):
        if not any(is_var(s) for s in a):
            if sum(1 for s in b if not is_var(s)) > len(a):
                raise Infeasible
    return u, v


def _normalize(eqs) -> list:
    out = []
    for u, v in eqs:
        u, v = _strip(tuple(u), tuple(v))
        if u != v and (u, v) not in out:
            out.append((u, v))
    return out


def _definition(eqs, protected):
    # auxiliary variables go first so that reported ones stay visible longer
    found = None
    for i, (u, v) in enumerate(eqs):
        for a, b in ((u, v), (v, u)):
            if len(a) == 1 and is_var(a[0]):
                y = a[0]
                if positive(y) not in {positive(s) for s in b if is_var(s)}:
                    value = b if y == positive(y) else bar(b)
                    if positive(y) not in protected:
                        return i, positive(y), value
                    if found is None:
                        found = (i, positive(y), value)
    return found


def _constant_splits(side: tuple, const: tuple) -> list:
    """All ways to read ``side`` (distinct variables) as the word ``const``."""
    out = []

    def go(i, j, acc):
        if i == len(side):
            if j == len(const):
                out.append(dict(acc))
            return
        s = side[i]
        if not is_var(s):
            if j < len(const) and const[j] == s:
                go(i + 1, j + 1, acc)
            return
        for k in range(j, len(const) + 1):
            piece = const[j:k]
            p = positive(s)
            acc[p] = piece if s == p else bar(piece)
            go(i + 1, k, acc)
            del acc[p]

    go(0, 0, {})
    return out


def _best_split(eqs):
    best = None
    for i, (u, v) in enumerate(eqs):
        for a, b in ((u, v), (v, u)):
            if any(is_var(s) for s in b):
                continue
            vs = [positive(s) for s in a if is_var(s)]
            if not vs or len(vs) != len(set(vs)):
                continue
            cases = _constant_splits(a, b)
            if best is None or len(cases) < len(best[1]):
                best = (i, cases)
    return best


@dataclass
class Component:
    """One alternative system; ``outputs`` give the reported values as words
    over its variables, to be freely reduced after substitution."""
    equations: list
    outputs: tuple


def presolve(eqs, report: Sequence[int], limit: int = 64) -> list:
    """Alternative systems whose union has the same group solutions."""
    protected = set(report)
    done = []
    todo = [(list(eqs), tuple((x,) for x in report))]
    while todo:
        system, outs = todo.pop()

        def put(x, value):
            nonlocal system, outs
            system = [(_subst(u, x, value), _subst(v, x, value)) for u, v in system]
            outs = tuple(_subst(w, x, value) for w in outs)

        try:
            system = _normalize(system)
            while True:
                d = _definition(system, protected)
                if d is None:
                    break
                i, y, value = d
                system = system[:i] + system[i + 1:]
                put(y, value)
                system = _normalize(system)
        except Infeasible:
            continue
        split = None
        if len(done) + len(todo) < limit:
            split = _best_split(system)
        if split is None:
            done.append(Component(system, outs))
            continue
        i, cases = split
        base = system[:i] + system[i + 1:]
        for case in reversed(cases):
            system = base
            saved = outs
            for x, value in sorted(case.items(), reverse=True):
                put(x, value)
            todo.append((system, outs))
            outs = saved
    return done


def component_variables(c: Component, order: Sequence[int]) -> tuple:
    used = set()
    for u, v in c.equations:
        used |= {positive(s) for s in u + v if is_var(s)}
    for w in c.outputs:
        used |= {positive(s) for s in w if is_var(s)}
    return tuple(x for x in order if x in used)


def group_solution(U: Sequence[int], V: Sequence[int], sigma: dict) -> bool:
    """Check free_reduce(sigma(U)) == free_reduce(sigma(V))."""
    def sub(w):
        out = []
        for s in w:
            if is_var(s):
                val = sigma[positive(s)]
                out.extend(val if s == positive(s) else bar(val))
            else:
                out.append(s)
        return free_reduce(out)
    return sub(U) == sub(V)
