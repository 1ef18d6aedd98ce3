"""Command-line interface.

Equation files look like::

    mode: monoid
    letters: a b
    vars: X Y
    aX = aaab

Tokens are declared names read by longest match, each optionally followed by
``^`` for its involution. ``1`` stands for the empty word. Lines starting with
``%`` are comments. Several equations form a system.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field

from . import edtol, groups, oracle
from .alphabet import Universe, is_reduced, is_var, positive
from .search import prepare, witness_trace

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


class InputError(Exception):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)


@dataclass
class EquationFile:
    mode: str = "monoid"
    letters: list = field(default_factory=list)
    vars: list = field(default_factory=list)
    equations: list = field(default_factory=list)

    def universe(self) -> Universe:
        names = {-(2 * i + 1): v for i, v in enumerate(self.vars)}
        return Universe(self.letters, 1, var_names=names)

    def symbols(self) -> dict:
        table = {}
        for i, a in enumerate(self.letters):
            table[a] = 2 * i + 1
        for i, x in enumerate(self.vars):
            table[x] = -(2 * i + 1)
        return table

    @property
    def variable_ids(self) -> tuple:
        return tuple(-(2 * i + 1) for i in range(len(self.vars)))

    def joined(self) -> tuple:
        return groups.encode_system(self.equations)


def tokenize(text: str, names: dict, line: int = 1, col: int = 1) -> tuple:
    """Read a side by longest match over ``names``; col is where text starts."""
    if text.strip() == "1" and "1" not in names:
        return ()
    by_len = sorted(names, key=len, reverse=True)
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            raise InputError("'#' is reserved", line, col + i)
        for name in by_len:
            if text.startswith(name, i):
                break
        else:
            raise InputError(f"unknown token starting with {ch!r}", line, col + i)
        i += len(name)
        s = names[name]
        if i < len(text) and text[i] == "^":
            s = s + 1 if s > 0 else s - 1
            i += 1
        out.append(s)
    return tuple(out)


def parse_equation_file(text: str) -> EquationFile:
    ef = EquationFile()
    headers = set()
    raw = []
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.strip()
        if not body or body.startswith("%"):
            continue
        m = re.match(r"\s*(mode|letters|vars)\s*:(.*)\Z", line)
        if m:
            key, val = m.group(1), m.group(2).split()
            if key in headers:
                raise InputError(f"duplicate '{key}' header", ln, 1)
            headers.add(key)
            if key == "mode":
                if val not in (["monoid"], ["group"]):
                    raise InputError("mode must be monoid or group", ln, m.start(2) + 1)
                ef.mode = val[0]
            else:
                for v in val:
                    if not _NAME.match(v):
                        raise InputError(f"bad name {v!r}", ln, line.index(v) + 1)
                setattr(ef, key, val)
            continue
        if line.count("=") != 1:
            raise InputError("expected 'LHS = RHS'", ln, 1)
        raw.append((ln, line))
    if "letters" not in headers:
        raise InputError("missing 'letters:' header")
    dup = set(ef.letters) & set(ef.vars)
    if dup or len(set(ef.letters)) < len(ef.letters) or len(set(ef.vars)) < len(ef.vars):
        raise InputError("names must be distinct")
    if not raw:
        raise InputError("no equations")
    names = ef.symbols()
    for ln, line in raw:
        k = line.index("=")
        U = tokenize(line[:k], names, ln, 1)
        V = tokenize(line[k + 1:], names, ln, k + 2)
        ef.equations.append((U, V))
    return ef


def parse_assignment(text: str, ef: EquationFile) -> dict:
    letters = {a: 2 * i + 1 for i, a in enumerate(ef.letters)}
    sigma = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise InputError(f"expected NAME=WORD in {part!r}")
        name, word = (s.strip() for s in part.split("=", 1))
        if name not in ef.vars:
            raise InputError(f"unknown variable {name!r}")
        w = tokenize(word, letters) if word else ()
        if not is_reduced(w):
            raise InputError(f"value of {name} is not reduced")
        sigma[-(2 * ef.vars.index(name) + 1)] = w
    missing = [x for i, x in enumerate(ef.vars) if -(2 * i + 1) not in sigma]
    if missing:
        raise InputError("no value for " + ", ".join(missing))
    return sigma


def _load(path: str) -> EquationFile:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise InputError(str(e)) from e
    try:
        return parse_equation_file(text)
    except InputError as e:
        raise InputError(f"{path}:{e}") from e


def _bounds(args) -> dict:
    kw = {}
    if args.max_states is not None:
        kw["max_states"] = args.max_states
    if args.max_depth is not None:
        kw["max_depth"] = args.max_depth
    if args.compress_above not in (None, "auto"):
        kw["compress_above"] = int(args.compress_above)
    return kw


def _solve(ef: EquationFile, args):
    U, V = ef.joined()
    u = ef.universe()
    progress = None
    if getattr(args, "progress", False):
        progress = lambda msg: print(msg, file=sys.stderr)
    return edtol.solve(U, V, u, ef.variable_ids, ef.mode, progress=progress, **_bounds(args)), u


def _verdict(sol, cls: str) -> int:
    if cls != "Empty":
        return EXIT_SAT
    return EXIT_UNSAT if sol.status == "complete" else EXIT_UNKNOWN


def _fmt_tuple(u: Universe, tup) -> str:
    return "#".join(u.fmt(w) for w in tup)


def cmd_solve(args) -> int:
    ef = _load(args.file)
    sol, _ = _solve(ef, args)
    cls = edtol.classify(sol)
    code = _verdict(sol, cls)
    print({EXIT_SAT: "SAT", EXIT_UNSAT: "UNSAT", EXIT_UNKNOWN: "UNKNOWN"}[code])
    print(f"classification: {cls}")
    print(f"status: {sol.status}")
    print(f"states: {sol.states}")
    print(f"edges: {sol.edges}")
    if args.emit_edtol:
        with open(args.emit_edtol, "wb") as f:
            f.write(edtol.export_automaton(sol, "json"))
    if args.emit_dot:
        with open(args.emit_dot, "wb") as f:
            f.write(edtol.export_automaton(sol, "dot"))
    return code


def cmd_enumerate(args) -> int:
    ef = _load(args.file)
    sol, u = _solve(ef, args)
    cls = edtol.classify(sol)
    if args.max_len is None and cls == "Infinite":
        raise InputError("the solution set is infinite; give --max-len")
    res = edtol.enumerate_solutions(sol, max_len=args.max_len, max_paths=args.max_paths)
    for tup in res.solutions:
        print(_fmt_tuple(u, tup))
    if res.truncated:
        print("truncated", file=sys.stderr)
    return _verdict(sol, cls)


def _evaluate(ef: EquationFile, sigma: dict):
    out = []
    for U, V in ef.equations:
        l, r = oracle._substitute(U, sigma), oracle._substitute(V, sigma)
        if ef.mode == "group":
            l, r = groups.free_reduce(l), groups.free_reduce(r)
        out.append((l, r))
    return out


def cmd_check(args) -> int:
    ef = _load(args.file)
    sigma = parse_assignment(args.assign, ef)
    u = ef.universe()
    ok = True
    for l, r in _evaluate(ef, sigma):
        ok = ok and l == r
        print(f"{u.fmt(l) or '1'} = {u.fmt(r) or '1'}")
    print("OK" if ok else "FAIL")
    return 0 if ok else 1


def _final_summary(i: int, summary: str) -> str:
    parts = []
    for item in summary.split(", "):
        c, w = item.split("->", 1)
        parts.append(f"h{i}({c})={w}")
    return ", ".join(parts)


def cmd_trace(args) -> int:
    ef = _load(args.file)
    if ef.mode != "monoid":
        raise InputError("trace works on monoid equations")
    sigma = parse_assignment(args.assign, ef)
    if not all(l == r for l, r in _evaluate(ef, sigma)):
        print("FAIL: the assignment is not a solution")
        return 1
    U, V = ef.joined()
    u = ef.universe()
    present = {positive(s) for s in U + V if is_var(s)}
    vs = tuple(x for x in ef.variable_ids if x in present)
    prob = prepare(U, V, u, vs, "monoid", vs, **_bounds(args))
    tr = witness_trace(prob, {x: sigma[x] for x in vs})
    print(f"initial: {u.fmt(tr.initial.W, sep=' ')}")
    for st in tr.steps:
        summary = st.summary
        if st.edge.kind == "final-compression":
            summary = _final_summary(st.index, summary)
        print(f"step {st.index} {st.edge.kind}: {summary}")
        for note in st.notes:
            print(f"  {note}")
        print(f"  W = {st.display}")
    print(f"{len(tr.steps)} steps, forward property checked on each")
    return 0


def cmd_oracle(args) -> int:
    ef = _load(args.file)
    U, V = ef.joined()
    u = ef.universe()
    q = oracle.OracleQuery(U, V, ef.variable_ids, tuple(sorted(u.A_plus)),
                           ef.mode, args.max_len, args.budget)
    sols = oracle.brute_solutions(q)
    order = sorted(sols, key=lambda t: (sum(len(w) for w in t), tuple(len(w) for w in t), t))
    for tup in order:
        print(_fmt_tuple(u, tup))
    return EXIT_SAT if sols else EXIT_UNSAT


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edtolsolve",
                                description="Solve word equations with involution and free-group equations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, search=True):
        sp.add_argument("file")
        if search:
            sp.add_argument("--max-states", type=int)
            sp.add_argument("--max-depth", type=int)
            sp.add_argument("--compress-above", default="auto",
                            help="block compression trigger length, or 'auto'")
            sp.add_argument("--progress", action="store_true", help="report search progress on stderr")

    sp = sub.add_parser("solve", help="decide satisfiability and classify the solution set")
    common(sp)
    sp.add_argument("--emit-edtol", metavar="PATH")
    sp.add_argument("--emit-dot", metavar="PATH")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("enumerate", help="list solutions in length-lexicographic order")
    common(sp)
    sp.add_argument("--max-len", type=int)
    sp.add_argument("--max-paths", type=int)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("check", help="check an assignment")
    common(sp, search=False)
    sp.add_argument("--assign", required=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("trace", help="print the search path for a known solution")
    common(sp)
    sp.add_argument("--assign", required=True)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("oracle", help="brute-force reference solutions")
    common(sp, search=False)
    sp.add_argument("--max-len", type=int, default=3)
    sp.add_argument("--budget", type=int, default=2_000_000)
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors, which would read as UNKNOWN
        return EXIT_ERROR if e.code else 0
    if getattr(args, "compress_above", "auto") not in (None, "auto"):
        try:
            int(args.compress_above)
        except ValueError:
            print("error: --compress-above takes an integer or 'auto'", file=sys.stderr)
            return EXIT_ERROR
    try:
        return args.func(args)
    except (InputError, ValueError, oracle.BudgetExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
