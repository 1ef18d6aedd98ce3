import json
import subprocess
import sys
from pathlib import Path

import pytest

from edtolsolve.cli import InputError, main, parse_assignment, parse_equation_file, tokenize

FIX = Path(__file__).resolve().parent.parent / "fixtures"
SIGMA5 = "X=bbbbb,Y=bbbba,Z=bab,P=abbba,Q=abbbbbabbba"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text):
    p = tmp_path / "eq.eq"
    p.write_text(text)
    return p


def test_tokenize_longest_match():
    names = {"a": 1, "ab": 3, "X": -1}
    assert tokenize("abaX^", names) == (3, 1, -2)
    assert tokenize(" 1 ", names) == ()
    with pytest.raises(InputError) as e:
        tokenize("a#", names, 4, 3)
    assert (e.value.line, e.value.col) == (4, 4)


def test_parse_file():
    ef = parse_equation_file("% c\nmode: group\nletters: a b\nvars: X\naX = X^b\n")
    assert ef.mode == "group" and ef.letters == ["a", "b"] and ef.vars == ["X"]
    assert ef.equations == [((1, -1), (-2, 3))]


@pytest.mark.parametrize("text,where", [
    ("letters: a\nvars: X\naX = Xc\n", "3:7"),
    ("letters: a\nvars: X\naX = X#\n", "3:7"),
    ("letters: a\nmode: ring\na = a\n", "2:"),
    ("letters: a\naX\n", "2:1"),
])
def test_parse_errors_report_position(text, where):
    with pytest.raises(InputError) as e:
        parse_equation_file(text)
    assert str(e.value).startswith(where)


def test_parse_rejects_clashing_names():
    with pytest.raises(InputError):
        parse_equation_file("letters: a\nvars: a\na = a\n")


def test_assignment_parsing():
    ef = parse_equation_file("letters: a b\nvars: X Y\nXY = ab\n")
    assert parse_assignment("X=a, Y=b^", ef) == {-1: (1,), -3: (4,)}
    assert parse_assignment("X=,Y=1", ef) == {-1: (), -3: ()}
    with pytest.raises(InputError):
        parse_assignment("X=ab^b,Y=a", ef)
    with pytest.raises(InputError):
        parse_assignment("X=a", ef)


def test_solve_linear_with_exports(capsys, tmp_path):
    js, dot = tmp_path / "a.json", tmp_path / "a.dot"
    code, out, _ = run(capsys, "solve", FIX / "linear.eq", "--emit-edtol", js, "--emit-dot", dot)
    assert code == 0
    assert out.splitlines()[:2] == ["SAT", "classification: Finite"]
    assert len(json.loads(js.read_text())["components"][0]["states"]) == 6
    assert dot.read_text().startswith("digraph")


def test_solve_unsat(capsys):
    code, out, _ = run(capsys, "solve", FIX / "a_eq_b.eq")
    assert code == 1 and out.startswith("UNSAT\nclassification: Empty")


def test_solve_capped_is_unknown(capsys):
    code, out, _ = run(capsys, "solve", FIX / "five_vars.eq", "--max-states", "20")
    assert code == 2 and out.startswith("UNKNOWN") and "status: capped" in out


def test_solve_infinite(capsys):
    code, out, _ = run(capsys, "solve", FIX / "commute.eq")
    assert code == 0 and "classification: Infinite" in out


def test_enumerate(capsys):
    assert run(capsys, "enumerate", FIX / "linear.eq")[:2] == (0, "aab\n")
    assert run(capsys, "enumerate", FIX / "commute.eq", "--max-len", "2")[1] == "\na\naa\n"
    assert run(capsys, "enumerate", FIX / "a_eq_b.eq")[:2] == (1, "")
    assert run(capsys, "enumerate", FIX / "system.eq")[1] == "a#b\n"


def test_enumerate_infinite_needs_bound(capsys):
    code, _, err = run(capsys, "enumerate", FIX / "commute.eq")
    assert code == 3 and "--max-len" in err


def test_group_files(capsys):
    assert run(capsys, "enumerate", FIX / "group_linear.eq")[1] == "aab\n"
    out = run(capsys, "enumerate", FIX / "group_commute.eq", "--max-len", "2")[1]
    assert out.splitlines() == ["", "a", "a^", "aa", "a^a^"]


def test_enumerated_tuples_pass_check(capsys, tmp_path):
    p = write(tmp_path, "letters: a b\nvars: X Y\nXbY = abba\n")
    _, out, _ = run(capsys, "enumerate", p)
    for line in out.splitlines():
        x, y = line.split("#")
        assert run(capsys, "check", p, "--assign", f"X={x},Y={y}")[0] == 0


def test_check(capsys):
    code, out, _ = run(capsys, "check", FIX / "five_vars.eq", "--assign", SIGMA5)
    assert code == 0 and out.endswith("OK\n")
    code, out, _ = run(capsys, "check", FIX / "five_vars.eq", "--assign", SIGMA5.replace("X=bbbbb", "X=bbbb"))
    assert code == 1 and out.endswith("FAIL\n")
    code, _, err = run(capsys, "check", FIX / "linear.eq", "--assign", "X=ab^b")
    assert code == 3 and "not reduced" in err


def test_trace_linear(capsys):
    code, out, _ = run(capsys, "trace", FIX / "linear.eq", "--assign", "X=aab")
    assert code == 0
    steps = [l for l in out.splitlines() if l.startswith("step ")]
    assert len(steps) == 5
    assert "h5(c1)=aab" in steps[-1]


def test_trace_five_var(capsys):
    code, out, _ = run(capsys, "trace", FIX / "five_vars.eq", "--assign", SIGMA5, "--compress-above", "0")
    assert code == 0
    assert "Lambda_b = {4, 5}" in out and "X_b = {X, Y}" in out
    assert "forward property checked" in out


def test_trace_trivial(capsys, tmp_path):
    p = write(tmp_path, "letters: a\nvars: X\nX = a\n")
    out = run(capsys, "trace", p, "--assign", "X=a")[1]
    assert "substitution: X -> aX" in out and "final-compression" in out


def test_trace_rejects_non_solution(capsys):
    assert run(capsys, "trace", FIX / "linear.eq", "--assign", "X=ab")[0] == 1


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", FIX / "group_commute.eq", "--max-len", "2")
    assert code == 0 and out.splitlines() == ["", "a", "a^", "aa", "a^a^"]


def test_missing_file(capsys):
    assert run(capsys, "solve", "/nonexistent.eq")[0] == 3


def test_usage_error_is_not_unknown(capsys):
    assert run(capsys, "solve", FIX / "linear.eq", "--max-states", "x")[0] == 3
    assert run(capsys, "bogus")[0] == 3


def test_output_is_deterministic(capsys):
    first = run(capsys, "solve", FIX / "commute.eq")
    assert run(capsys, "solve", FIX / "commute.eq") == first


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "edtolsolve", "enumerate", str(FIX / "linear.eq")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "aab\n"
