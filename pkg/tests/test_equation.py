import pytest

from conftest import universe, w
from edtolsolve.alphabet import HASH, NF, ONE
from edtolsolve.equation import (Bounds, ExtendedEquation, blocks, build_winit, ends_clash,
                                 is_final, join_blocks, refute, validate_state, weight)


def winit(U, V, variables=(-1,)):
    return build_winit(w(U), w(V), variables, universe())


def bounds_for(state):
    return Bounds.for_equation(10, len(state.W), state.W.count(HASH))


def test_winit_layout():
    s = winit("aX", "aaab")
    assert blocks(s.W) == [w("X"), w("aX"), w("aaab"), w("X^a^"), w("b^a^a^a^"), w("X^")]
    assert s.W[0] == s.W[-1] == HASH
    assert s.X == {-1, -2}
    assert {1, 2, 3, 4, HASH} <= s.B


def test_winit_rejects_unlisted_and_unbalanced():
    with pytest.raises(ValueError):
        build_winit(w("aY"), w("a"), (-1,), universe())
    with pytest.raises(ValueError):
        build_winit(w("aX") + (HASH,), w("a"), (-1,), universe())


def test_join_blocks_inverts_blocks():
    parts = [w("ab"), (), w("X")]
    assert blocks(join_blocks(parts)) == parts


def test_initial_state_is_valid():
    s = winit("aX", "aaab")
    s = ExtendedEquation(s.W, s.B, s.X, {}, {-1: NF(1, 3), -2: NF(4, 2)})
    assert validate_state(s, bounds_for(s), universe().A) == []


def test_validation_flags_marker_count():
    s = winit("aX", "aaab")
    b = Bounds.for_equation(10, len(s.W), 3)
    assert any(m.startswith("marker count") for m in validate_state(s, b))


def test_validation_flags_variable_set():
    s = winit("aX", "aaab")
    t = ExtendedEquation(s.W, s.B, {-1, -2, -3, -4}, {}, {})
    assert any(m.startswith("variable set") for m in validate_state(t, bounds_for(t)))


def test_weight_orders_lexicographically():
    s = winit("aX", "aaab")
    t = ExtendedEquation(s.W[:-2] + (HASH,), s.B, s.X)
    assert weight(t) < weight(s)


def test_refute_finds_prefix_clash():
    s = winit("aX", "bX")
    s = ExtendedEquation(s.W, s.B, s.X, {}, {-1: ONE, -2: ONE})
    assert refute(s) is not None


def test_refute_accepts_solvable_constraint():
    s = winit("aX", "aaab")
    s = ExtendedEquation(s.W, s.B, s.X, {}, {-1: NF(1, 3), -2: NF(4, 2)})
    assert refute(s) is None


def test_refute_uses_lengths():
    # |aX| = |X| has no solution
    s = winit("aX", "X")
    s = ExtendedEquation(s.W, s.B, s.X, {}, {-1: NF(1, 1), -2: NF(2, 2)})
    assert refute(s) is not None


def test_ends_clash_stops_at_unknown():
    mu = {-1: NF(3, 3)}
    assert ends_clash(w("Xa"), w("aY"), mu.get)
    assert not ends_clash(w("Ya"), w("aX"), {-1: NF(1, 1)}.get)
    assert not ends_clash(w("bY"), w("Xa"), {-1: NF(3, 3), -3: None}.get)


def test_is_final_requires_seed_blocks():
    u = universe()
    c = u.seed(0)
    W = join_blocks([(c,), w("ab"), w("b^a^"), (c + 1,)])
    s = ExtendedEquation(W, u.A | {c, c + 1}, ())
    assert is_final(s, [c])
    assert not is_final(s, [c, c + 2])
