import pytest

from conftest import universe, w
from edtolsolve.edtol import classify, enumerate_solutions, solve
from edtolsolve.groups import (FreshVariables, GroupEquation, Triangle, atoms, encode,
                               free_reduce, group_solution, presolve, triangulate)
from edtolsolve.oracle import OracleQuery, brute_solutions


def fresh(u=None):
    u = u or universe()
    return FreshVariables(u, (-1, -3))


def test_free_reduce():
    assert free_reduce(w("aa^b")) == w("b")
    assert free_reduce(w("ab^ba^")) == ()
    assert free_reduce(w("Xa^aX^")) == ()
    assert free_reduce((1, 0, 2)) == (1, 0, 2)


def test_atoms_group_constant_runs():
    assert atoms(w("abXbY")) == [w("ab"), w("X"), w("b"), w("Y")]


def test_triangulate_binds_long_sides():
    tris = triangulate(w("Xa"), w("aX"), fresh())
    assert all(isinstance(t, Triangle) for t in tris)
    assert len(tris) == 2
    z = tris[0].z
    assert all(t.z == z for t in tris)


def test_triangulate_short_side_needs_no_binding():
    tris = triangulate(w("aXb"), w("a"), fresh())
    assert len(tris) == 2
    assert tris[-1].z == w("a") or tris[0].z == w("a")


@pytest.mark.parametrize("U,V", [("Xa", "aX"), ("aX", "aaab"), ("XaX", "b"),
                                 ("XYX^Y^", "ab"), ("XaYbX^", "Y^"), ("abXba", "Xab")])
def test_encoding_length_bound(U, V):
    enc = encode(GroupEquation(w(U), w(V), (-1, -3)), universe())
    assert len(enc.U) + len(enc.V) <= 15 * (len(U.replace("^", "")) + len(V.replace("^", "")))


def test_encoding_solutions_restrict_to_group_solutions():
    # every reduced solution of the monoid system gives a group solution
    eq = GroupEquation(w("Xa"), w("aX"), (-1,))
    u = universe()
    enc = encode(eq, u)
    assert enc.report == (-1,)
    assert enc.components


def test_presolve_substitutes_definitions():
    comps = presolve([(w("X"), w("ab"))], (-1,))
    assert len(comps) == 1
    assert comps[0].equations == []
    assert comps[0].outputs == (w("ab"),)


def test_presolve_detects_clashes():
    assert presolve([(w("aX"), w("bY")), (w("X"), w("b")), (w("Y"), w("a"))], (-1, -3)) == []


def test_presolve_splits_constant_sides():
    comps = presolve([(w("XY"), w("ab")), (w("YX"), w("ba"))], ())
    assert len(comps) >= 1


def test_group_solution_check():
    assert group_solution(w("Xa"), w("aX"), {-1: w("a^a^")})
    assert not group_solution(w("Xa"), w("aX"), {-1: w("b")})


def test_centralizer():
    sol = solve(w("Xa"), w("aX"), universe(), mode="group")
    assert sol.status == "complete"
    assert classify(sol) == "Infinite"
    got = {t[0] for t in enumerate_solutions(sol, max_len=2).solutions}
    assert got == {(), w("a"), w("aa"), w("a^"), w("a^a^")}


def test_linear_equation():
    sol = solve(w("aX"), w("aaab"), universe(), mode="group")
    assert classify(sol) == "Finite"
    assert enumerate_solutions(sol).solutions == [(w("aab"),)]


def test_cancellation_solution():
    sol = solve(w("aXb"), w("b"), universe(), mode="group")
    assert enumerate_solutions(sol).solutions == [(w("a^"),)]


def test_no_solution():
    sol = solve(w("XaX"), w("b"), universe(), mode="group")
    assert classify(sol) == "Empty"


@pytest.mark.parametrize("U,V", [("Xab", "bXa"), ("XbX^", "b"), ("XaX^", "a"), ("Xa", "bX"),
                                 ("XX", "aa"), ("Xb", "a")])
def test_against_oracle(U, V):
    sol = solve(w(U), w(V), universe(), mode="group")
    assert sol.status == "complete"
    got = set(enumerate_solutions(sol, max_len=2).solutions)
    want = brute_solutions(OracleQuery(w(U), w(V), (-1,), (1, 3), "group", 2))
    assert got == want


def test_identity_equation_is_free():
    sol = solve(w("X"), w("X"), universe("a"), mode="group")
    assert classify(sol) == "Infinite"
    got = {t[0] for t in enumerate_solutions(sol, max_len=1).solutions}
    assert got == {(), w("a"), w("a^")}


def test_group_system():
    from edtolsolve.alphabet import HASH
    U = w("X") + (HASH,) + w("Xb")
    V = w("Ya") + (HASH,) + w("ab")
    sol = solve(U, V, universe(), (-1, -3), mode="group")
    assert enumerate_solutions(sol, max_len=2).solutions == [(w("a"), ())]
