"""EDT0L view of trimmed search graphs: enumeration, classification, export.

A solved equation is a :class:`SolutionSet`, a union of components. Monoid
equations give one component. Group equations may give several, one per
alternative system left by the presolver; their reported values are words
over the component's variables that are freely reduced after substitution.
"""

from __future__ import annotations

import copy
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import groups
from .alphabet import HASH, NF, Universe, bar, inv, is_reduced, is_var, positive
from .equation import ExtendedEquation
from .search import PartialNfa, Problem, explore, has_cycle, prepare, trim
from .transitions import Edge, Endo, SubstitutionSpec, describe_endo

FORMAT = "edtol-nfa"
VERSION = 1


@dataclass
class EdtolAutomaton:
    """A trimmed automaton with its seed letters.

    ``explored`` keeps the untrimmed graph when the automaton was built by
    the solver, for auditing.

    ``outputs`` holds one entry per reported variable: a word over the
    problem's symbols, or None for a variable no equation constrains. Without
    outputs the problem's own report variables are used.
    """
    nfa: PartialNfa
    seeds: tuple
    outputs: tuple | None = None
    reduce: bool = False
    explored: PartialNfa | None = field(default=None, repr=False, compare=False)

    @property
    def problem(self) -> Problem:
        return self.nfa.problem

    @property
    def seed_word(self) -> str:
        u = self.problem.universe
        return "#".join(u.name(c) for c in self.seeds)

    @property
    def status(self) -> str:
        return self.nfa.status


@dataclass
class SolutionSet:
    mode: str
    universe: Universe
    report: tuple
    components: list = field(default_factory=list)

    @property
    def status(self) -> str:
        if any(c.status != "complete" for c in self.components):
            return "capped"
        return "complete"

    @property
    def states(self) -> int:
        return sum(len(c.nfa.states) for c in self.components)

    @property
    def edges(self) -> int:
        return sum(len(c.nfa.edges) for c in self.components)


def build_automaton(nfa: PartialNfa, outputs=None, reduce: bool = False) -> EdtolAutomaton:
    t = trim(nfa)
    return EdtolAutomaton(t, tuple(nfa.problem.seeds), outputs, reduce, nfa)


def compose_apply(labels: Sequence[Endo], seed: Iterable[int]) -> tuple:
    """h_1(h_2(...h_t(seed))) for labels h_1 ... h_t in path order."""
    w = tuple(seed)
    for h in reversed(list(labels)):
        w = h.apply(w)
    return w


# ------------------------------------------------------------------ solving

def _strip_common(U: tuple, V: tuple) -> tuple:
    i = 0
    while i < min(len(U), len(V)) and U[i] == V[i]:
        i += 1
    U, V = U[i:], V[i:]
    while U and V and U[-1] == V[-1]:
        U, V = U[:-1], V[:-1]
    return U, V


def _split_hash(word: tuple) -> list:
    parts = [[]]
    for s in word:
        if s == HASH:
            parts.append([])
        else:
            parts[-1].append(s)
    return [tuple(p) for p in parts]


def _occurring(*words) -> set:
    return {positive(s) for w in words for s in w if is_var(s)}


def solve(U: Sequence[int], V: Sequence[int], universe: Universe,
          variables: Sequence[int] | None = None, mode: str = "monoid",
          progress=None, **bound_kw) -> SolutionSet:
    """Explore and trim every component of the equation U = V."""
    U, V = tuple(U), tuple(V)
    if variables is None:
        variables = []
        for s in U + V:
            if is_var(s) and positive(s) not in variables:
                variables.append(positive(s))
    variables = tuple(variables)
    out = SolutionSet(mode, universe, variables)
    if mode == "group":
        system = [groups.GroupEquation(u, v, variables)
                  for u, v in zip(_split_hash(U), _split_hash(V))]
        enc = groups.encode(system, universe)
        parts = []
        for U3, V3, vs, outs in enc.components:
            vs, outs = _free_outputs(U3, V3, vs, outs)
            parts.append((U3, V3, vs, outs))
        reduce = True
    elif mode == "monoid":
        U2, V2 = _strip_common(U, V)
        live = _occurring(U2, V2)
        if all(x in live for x in variables):
            parts = [(U, V, variables, None)]
        else:
            vs = tuple(x for x in variables if x in live)
            outs = tuple((x,) if x in live else None for x in variables)
            parts = [(U2, V2, vs, outs)]
        reduce = False
    else:
        raise ValueError(f"unknown mode {mode}")
    for U3, V3, vs, outs in parts:
        u = copy.copy(universe)
        prob = prepare(U3, V3, u, vs, mode, vs, **bound_kw)
        nfa = explore(prob, progress=progress)
        out.components.append(build_automaton(nfa, outs, reduce))
    return out


def _free_outputs(U, V, vs, outs):
    # a variable absent from every equation that occurs once in the outputs
    # makes its output range over all reduced words
    live = _occurring(U, V)
    outs = list(outs)
    for x in vs:
        if x in live:
            continue
        hits = [i for i, w in enumerate(outs) if w is not None for s in w if positive(s) == x]
        if len(hits) == 1:
            outs[hits[0]] = None
    used = live | _occurring(*(w for w in outs if w is not None))
    return tuple(x for x in vs if x in used), tuple(outs)


# -------------------------------------------------------------- enumeration

@dataclass
class Enumeration:
    solutions: list
    truncated: bool


def _components(x) -> list:
    return x.components if isinstance(x, SolutionSet) else [x]


def _raw_solutions(aut: EdtolAutomaton, caps: dict | None, max_paths):
    """Value tuples over all problem variables, read backwards from finals."""
    nfa = aut.nfa
    prob = nfa.problem
    variables = list(prob.variables)
    capl = [None if caps is None else caps[x] for x in variables]
    inn = nfa.in_edges()
    start = tuple((c,) for c in aut.seeds)
    seen = set()
    queue = deque()
    for f in sorted(nfa.finals):
        item = (f, start)
        seen.add(item)
        queue.append(item)
    found = set()
    work = 0
    while queue:
        key, ws = queue.popleft()
        work += 1
        if max_paths is not None and work > max_paths:
            return found, True
        if key in nfa.initials:
            for w in ws:
                if any(s <= 0 or not prob.universe.is_A(s) for s in w):
                    raise AssertionError("solution component leaves A")
                if not is_reduced(w):
                    raise AssertionError("solution component is not reduced")
            found.add(ws)
        for e in inn[key]:
            nws = tuple(e.label.apply(w) for w in ws)
            if caps is not None and any(c is not None and len(w) > c for w, c in zip(nws, capl)):
                continue
            item = (e.src, nws)
            if item in seen:
                continue
            seen.add(item)
            queue.append(item)
    return found, False


def reduced_words(letters: Sequence[int], max_len: int) -> list:
    """Every reduced word over ``letters`` of length at most max_len."""
    out = [()]
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for a in letters:
                if w and w[-1] == inv(a):
                    continue
                nxt.append(w + (a,))
        out.extend(nxt)
        layer = nxt
    return out


def _evaluate(word, values: dict) -> tuple:
    out = []
    for s in word:
        if is_var(s):
            v = values[positive(s)]
            out.extend(v if s == positive(s) else bar(v))
        else:
            out.append(s)
    return tuple(out)


def enumerate_solutions(target, max_len: int | None = None,
                        max_paths: int | None = None) -> Enumeration:
    """Solution tuples of the reported variables in length-lexicographic order.

    Words are pushed backwards from the final states through the edge labels.
    Labels never shorten words except on final edges, so a length bound
    prunes soundly for reported variables; auxiliary variables are bounded by
    |UV| times max_len.
    """
    found = set()
    truncated = False
    for aut in _components(target):
        prob = aut.problem
        outputs = aut.outputs
        if outputs is None:
            outputs = tuple((x,) for x in prob.report)
        free = [i for i, w in enumerate(outputs) if w is None]
        if max_len is None and (free or has_cycle(aut.nfa)):
            if aut.nfa.states:
                raise ValueError("an unbounded enumeration needs max_len on an infinite solution set")
            continue
        caps = None
        if max_len is not None:
            aux = max(1, len(prob.U) + len(prob.V)) * max(max_len, 1)
            exact = {w[0] for w in outputs if w is not None and len(w) == 1 and w[0] == positive(w[0])}
            caps = {x: (max_len if x in exact else aux) for x in prob.variables}
        raw, cut = _raw_solutions(aut, caps, max_paths)
        truncated = truncated or cut
        if not raw:
            continue
        fill = reduced_words(sorted(prob.universe.A_pm), max_len) if free else [()]
        for ws in raw:
            values = dict(zip(prob.variables, ws))
            tup = []
            for w in outputs:
                if w is None:
                    tup.append(None)
                    continue
                val = _evaluate(w, values)
                if aut.reduce:
                    val = groups.free_reduce(val)
                tup.append(val)
            if max_len is not None and any(v is not None and len(v) > max_len for v in tup):
                continue
            for combo in itertools.product(fill, repeat=len(free)):
                full = list(tup)
                for i, v in zip(free, combo):
                    full[i] = v
                found.add(tuple(full))
    sols = sorted(found, key=lambda t: (sum(len(w) for w in t), tuple(len(w) for w in t), t))
    return Enumeration(sols, truncated)


def classify(target) -> str:
    comps = [c for c in _components(target) if c.nfa.states]
    if not comps:
        return "Empty"
    for c in comps:
        if has_cycle(c.nfa) or (c.outputs is not None and None in c.outputs):
            return "Infinite"
    return "Finite"


# ------------------------------------------------------------------- export

def _nf(m: NF) -> list:
    return [m.first, m.last]


def _state_json(s: ExtendedEquation, sid: int, u: Universe, initial: bool, final: bool) -> dict:
    return {
        "id": sid,
        "W": list(s.W),
        "display": u.fmt(s.W, " "),
        "B": sorted(s.B),
        "X": sorted(s.X),
        "theta": [[x, t] for x, t in sorted(s.theta.items())],
        "mu": [[x] + _nf(m) for x, m in sorted(s.mu.items())],
        "initial": initial,
        "final": final,
    }


def _ordered(nfa: PartialNfa):
    keys = sorted(nfa.states)
    ids = {k: i for i, k in enumerate(keys)}
    edges = sorted(nfa.edges, key=lambda e: (ids[e.src], ids[e.dst], e.kind,
                                               e.label.items(), e.spec or ()))
    return keys, ids, edges


def _component_json(aut: EdtolAutomaton) -> dict:
    nfa = aut.nfa
    prob = nfa.problem
    u = prob.universe
    keys, ids, edges = _ordered(nfa)
    used = set()
    for k in keys:
        s = nfa.states[k]
        used |= set(s.B) | set(s.X)
    for e in edges:
        for c, w in e.label.items():
            used.add(c)
            used.update(w)
    return {
        "status": nfa.status,
        "equation": {
            "U": list(prob.U),
            "V": list(prob.V),
            "variables": list(prob.variables),
        },
        "outputs": None if aut.outputs is None else [None if w is None else list(w)
                                                      for w in aut.outputs],
        "reduce": aut.reduce,
        "seeds": list(aut.seeds),
        "seed_word": aut.seed_word,
        "symbols": [{"id": x, "name": u.name(x)} for x in sorted(used)],
        "states": [_state_json(nfa.states[k], ids[k], u, k in nfa.initials, k in nfa.finals)
                   for k in keys],
        "edges": [{
            "src": ids[e.src],
            "dst": ids[e.dst],
            "kind": e.kind,
            "label": [[c, list(w)] for c, w in e.label.canonical_items()],
            "summary": e.describe(u),
            "spec": None if e.spec is None else {
                "kind": e.spec.kind, "var": e.spec.var,
                "word": list(e.spec.word), "new_var": e.spec.new_var},
        } for e in edges],
    }


def as_solution_set(target) -> SolutionSet:
    if isinstance(target, SolutionSet):
        return target
    prob = target.problem
    return SolutionSet(prob.mode, prob.universe, tuple(prob.report), [target])


def to_json_dict(target) -> dict:
    sset = as_solution_set(target)
    u = sset.universe
    return {
        "format": FORMAT,
        "version": VERSION,
        "mode": sset.mode,
        "status": sset.status,
        "classification": classify(sset),
        "letters": list(u.letters),
        "var_names": {str(k): v for k, v in sorted(u.var_names.items())},
        "report": list(sset.report),
        "components": [_component_json(c) for c in sset.components],
    }


def export_automaton(target, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(to_json_dict(target), sort_keys=True, indent=1) + "\n").encode()
    if fmt == "dot":
        return to_dot(target).encode()
    raise ValueError(f"unknown format {fmt}")


def to_dot(target) -> str:
    sset = as_solution_set(target)
    lines = ["digraph edtol {", "  rankdir=TB;", "  node [shape=box, fontname=monospace];"]
    for ci, aut in enumerate(sset.components):
        nfa = aut.nfa
        u = nfa.problem.universe
        keys, ids, edges = _ordered(nfa)
        lines.append(f"  subgraph cluster_{ci} {{")
        lines.append(f'    label="component {ci}";')
        for k in keys:
            s = nfa.states[k]
            attrs = [f'label="{_esc(u.fmt(s.W, " "))}"']
            if k in nfa.initials:
                attrs.append("style=bold")
            if k in nfa.finals:
                attrs.append("peripheries=2")
            lines.append(f"    s{ci}_{ids[k]} [{', '.join(attrs)}];")
        for e in edges:
            lines.append(f'    s{ci}_{ids[e.src]} -> s{ci}_{ids[e.dst]} '
                         f'[label="{_esc(e.describe(u))}"];')
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def import_automaton(data) -> SolutionSet:
    if isinstance(data, (bytes, str)):
        data = json.loads(data)
    if data.get("format") != FORMAT or data.get("version") != VERSION:
        raise ValueError("not an edtol-nfa version 1 document")
    u = Universe(data["letters"], 1, var_names={int(k): v for k, v in data["var_names"].items()})
    sset = SolutionSet(data["mode"], u, tuple(data["report"]))
    for comp in data["components"]:
        eq = comp["equation"]
        cu = copy.copy(u)
        vs = tuple(eq["variables"])
        prob = prepare(eq["U"], eq["V"], cu, vs, data["mode"], vs)
        nfa = PartialNfa(prob, status=comp["status"])
        byid = {}
        for st in comp["states"]:
            s = ExtendedEquation(st["W"], st["B"], st["X"], {x: t for x, t in st["theta"]},
                                 {m[0]: NF(m[1], m[2]) for m in st["mu"]})
            byid[st["id"]] = s.key
            nfa.states[s.key] = s
            if st["initial"]:
                nfa.initials.add(s.key)
            if st["final"]:
                nfa.finals.add(s.key)
        for e in comp["edges"]:
            spec = None
            if e["spec"] is not None:
                sp = e["spec"]
                spec = SubstitutionSpec(sp["kind"], sp["var"], tuple(sp["word"]), sp["new_var"])
            label = Endo({c: tuple(w) for c, w in e["label"]})
            nfa.edges.add(Edge(byid[e["src"]], byid[e["dst"]], label, e["kind"], spec))
        outs = comp["outputs"]
        if outs is not None:
            outs = tuple(None if w is None else tuple(w) for w in outs)
        sset.components.append(EdtolAutomaton(nfa, tuple(comp["seeds"]), outs, comp["reduce"]))
    return sset


_INT_LIST = {"type": "array", "items": {"type": "integer"}}

JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "version", "mode", "status", "classification", "letters",
                 "var_names", "report", "components"],
    "properties": {
        "format": {"const": FORMAT},
        "version": {"const": VERSION},
        "mode": {"enum": ["monoid", "group"]},
        "status": {"enum": ["complete", "capped"]},
        "classification": {"enum": ["Empty", "Finite", "Infinite"]},
        "letters": {"type": "array", "items": {"type": "string"}},
        "var_names": {"type": "object", "additionalProperties": {"type": "string"}},
        "report": _INT_LIST,
        "components": {"type": "array", "items": {
            "type": "object",
            "required": ["status", "equation", "outputs", "reduce", "seeds", "states", "edges"],
            "properties": {
                "status": {"enum": ["complete", "capped"]},
                "equation": {
                    "type": "object",
                    "required": ["U", "V", "variables"],
                    "properties": {"U": _INT_LIST, "V": _INT_LIST, "variables": _INT_LIST},
                },
                "outputs": {"anyOf": [
                    {"type": "null"},
                    {"type": "array", "items": {"anyOf": [{"type": "null"}, _INT_LIST]}}]},
                "reduce": {"type": "boolean"},
                "seeds": _INT_LIST,
                "seed_word": {"type": "string"},
                "symbols": {"type": "array", "items": {
                    "type": "object", "required": ["id", "name"]}},
                "states": {"type": "array", "items": {
                    "type": "object",
                    "required": ["id", "W", "B", "X", "theta", "mu", "initial", "final"]}},
                "edges": {"type": "array", "items": {
                    "type": "object",
                    "required": ["src", "dst", "kind", "label"],
                    "properties": {"kind": {"enum": ["substitution", "compression",
                                                     "final-compression"]}}}},
            },
        }},
    },
}
