import itertools

import pytest

from edtolsolve.alphabet import (HASH, NF, ONE, ZERO, LetterPool, PoolExhausted, Universe, bar,
                                 inv, is_reduced, mu0, mu0_word, nf_elements, nf_inv,
                                 nf_left_factors, nf_mul, positive)

LETTERS = [1, 2, 3, 4]
ELEMS = nf_elements(LETTERS)


def test_involution_pairs():
    assert [inv(s) for s in (1, 2, 3, 4, -1, -2, -3, -4, 0)] == [2, 1, 4, 3, -2, -1, -4, -3, 0]
    assert all(inv(inv(s)) == s for s in range(-20, 20))
    assert positive(4) == 3 and positive(-2) == -1 and positive(5) == 5


def test_bar_reverses_and_inverts():
    assert bar((1, 3, -1)) == (-2, 4, 2)
    assert bar(bar((1, 3, 4, -3))) == (1, 3, 4, -3)


def test_nf_size():
    assert len(ELEMS) == 2 + 16


def test_nf_associative():
    for x, y, z in itertools.product(ELEMS, repeat=3):
        assert nf_mul(nf_mul(x, y), z) == nf_mul(x, nf_mul(y, z))


def test_nf_involution_is_antihomomorphism():
    for x, y in itertools.product(ELEMS, repeat=2):
        assert nf_inv(nf_mul(x, y)) == nf_mul(nf_inv(y), nf_inv(x))
    assert all(nf_inv(nf_inv(x)) == x for x in ELEMS)


def test_nf_units_and_zero():
    for x in ELEMS:
        assert nf_mul(ONE, x) == x == nf_mul(x, ONE)
        assert nf_mul(ZERO, x) == ZERO == nf_mul(x, ZERO)


def test_mu0_word_matches_reducedness():
    for n in range(5):
        for word in itertools.product(LETTERS, repeat=n):
            m = mu0_word(word)
            if not is_reduced(word):
                assert m == ZERO
            elif word:
                assert m == NF(word[0], word[-1])
            else:
                assert m == ONE


def test_marker_is_zero():
    assert mu0(HASH) == ZERO
    assert mu0_word((1, HASH)) == ZERO


def test_left_factors():
    got = nf_left_factors(NF(1, 3), NF(1, 1), ELEMS)
    assert ONE not in got
    assert set(got) == {NF(1, 3), NF(3, 3), NF(4, 3)}


def test_universe_layout():
    u = Universe(["a", "b"], 10)
    assert u.first_fresh == 5
    assert u.size_C % 2 == 1
    assert u.A_pm == frozenset({1, 2, 3, 4})
    assert u.letter("b", inverse=True) == 4
    assert u.seed(0) == 5 and u.seed(1) == 7
    assert u.name(2) == "a^" and u.name(HASH) == "#"
    assert u.fmt((1, 3, 4)) == "abb^"


def test_pool_is_lowest_first_and_bounded():
    u = Universe(["a"], 1, kappa=7)
    pool = LetterPool(u, used_constants={0, 1, 2})
    assert pool.fresh_letters(1, [NF(1, 1)]) == [(3, 4)]
    assert pool.mu[4] == NF(2, 2)
    with pytest.raises(PoolExhausted):
        pool.fresh_letters(2)
    assert pool.fresh_variable() == (-1, -2)
    assert pool.fresh_variable() == (-3, -4)
