import pytest

from conftest import w
from edtolsolve.alphabet import HASH
from edtolsolve.oracle import BudgetExceeded, OracleQuery, brute_solutions, is_solution, reduced_words

A, B = 1, 3


def q(U, V, mode="monoid", max_len=3, letters=(A, B), variables=(-1,), **kw):
    return OracleQuery(w(U), w(V), variables, letters, mode, max_len, **kw)


def test_reduced_words_count_and_order():
    words = reduced_words([1, 2, 3, 4], 3)
    assert len(words) == 1 + 4 + 12 + 36
    assert words[0] == ()
    assert all(len(x) <= len(y) for x, y in zip(words, words[1:]))
    assert all((1, 2) != x[i:i + 2] and (3, 4) != x[i:i + 2] for x in words for i in range(len(x)))


def test_single_solution():
    assert brute_solutions(q("aX", "aaab", max_len=4)) == {(w("aab"),)}


def test_monoid_commutation_gives_powers_of_a():
    sols = brute_solutions(q("aX", "Xa", letters=(A,)))
    assert sols == {((),), (w("a"),), (w("aa"),), (w("aaa"),)}


def test_group_centralizer():
    sols = brute_solutions(q("Xa", "aX", mode="group", max_len=2))
    assert {s[0] for s in sols} == {(), w("a"), w("aa"), w("a^"), w("a^a^")}


def test_no_solutions():
    assert brute_solutions(q("a", "b", variables=())) == set()


def test_symmetric_under_swap():
    for U, V in [("aXb", "Xab"), ("XX", "aXa"), ("X^a", "aX")]:
        assert brute_solutions(q(U, V)) == brute_solutions(q(V, U))


def test_group_agrees_with_monoid_on_positive_solutions():
    for U, V in [("aX", "aaab"), ("aXb", "abX"), ("XbX", "babab")]:
        mono = brute_solutions(q(U, V))
        grp = brute_solutions(q(U, V, mode="group"))
        assert mono == {s for s in grp if all(c % 2 for c in s[0])}


def test_group_cancellation_finds_more():
    # X = a^ gives a a^ b = b in the group only
    sols = brute_solutions(q("aXb", "b", mode="group", max_len=2))
    assert sols == {(w("a^"),)}
    assert brute_solutions(q("aXb", "b", max_len=2)) == set()


def test_systems_with_marker():
    U = w("X") + (HASH,) + w("Xb")
    V = w("a") + (HASH,) + w("ab")
    sols = brute_solutions(OracleQuery(U, V, (-1,), (A, B), "monoid", 2))
    assert sols == {(w("a"),)}


def test_mismatched_markers_rejected():
    with pytest.raises(ValueError):
        brute_solutions(OracleQuery((HASH,) + w("X"), w("a"), (-1,), (A,), "monoid", 2))


def test_budget():
    with pytest.raises(BudgetExceeded):
        brute_solutions(q("XY", "YX", variables=(-1, -3), max_len=4, budget=1000))


def test_unknown_mode():
    with pytest.raises(ValueError):
        brute_solutions(q("aX", "Xa", mode="ring"))


def test_is_solution_uses_involution():
    assert is_solution(w("X^"), w("b^a^"), {-1: w("ab")})
    assert not is_solution(w("X^"), w("ab"), {-1: w("ab")})
