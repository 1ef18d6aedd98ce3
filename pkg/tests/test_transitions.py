import pytest

from conftest import universe, w
from edtolsolve.alphabet import HASH, NF, ONE
from edtolsolve.equation import ExtendedEquation, build_winit, join_blocks
from edtolsolve.transitions import (IDENTITY, Edge, Endo, InvalidTransition, SubstitutionSpec,
                                    apply_substitution, check_forward, compress, describe_endo,
                                    final_compress, validate_edge)


def linear_state(mu_x=NF(1, 3)):
    s = build_winit(w("aX"), w("aaab"), (-1,), universe())
    return ExtendedEquation(s.W, s.B, s.X, {}, {-1: mu_x, -2: NF(4, 2)})


def test_endo_closes_under_involution():
    h = Endo({5: (1, 3)})
    assert h(6) == (4, 2)
    assert h.apply((5, 1, 6)) == (1, 3, 1, 4, 2)
    with pytest.raises(ValueError):
        Endo({5: (1,), 6: (1,)})
    with pytest.raises(ValueError):
        Endo({-1: (1,)})


def test_endo_composition():
    f = Endo({5: (7, 3)})
    g = Endo({7: (1, 1)})
    assert g.then(f).apply((5,)) == (1, 1, 3)
    assert IDENTITY.is_identity()


def test_pop_and_erase():
    s = linear_state()
    t = apply_substitution(s, SubstitutionSpec("pop", -1, (1,)), {-1: NF(1, 3)})
    assert t.W[:7] == (HASH,) + w("aX") + (HASH,) + w("aaX")
    with pytest.raises(InvalidTransition):
        apply_substitution(t, SubstitutionSpec("erase", -1))
    with pytest.raises(InvalidTransition):
        apply_substitution(s, SubstitutionSpec("pop", -1, (3,)), {-1: NF(1, 3)})


def test_split_types_the_new_variable():
    s = linear_state(NF(1, 1))
    t = apply_substitution(s, SubstitutionSpec("split", -1, (1,), -3), {-3: ONE, -1: NF(1, 1)})
    assert t.theta[-3] == 1 and t.theta[-4] == 2
    assert {-3, -4} <= t.X


def test_compress_pair_decreases_weight():
    u = universe()
    W = join_blocks([w("ab"), w("aab"), w("b^a^a^"), w("b^a^")])
    s = ExtendedEquation(W, u.A, ())
    c = u.seed(0)
    h = Endo({c: (1, 3)})
    t = compress(s, h, u.A | {c, c + 1}, u.A)
    assert t.W == join_blocks([(c,), (1, c), (c + 1, 2), (c + 1,)])
    assert t.mu[c] == NF(1, 3)
    edge = Edge(s.key, t.key, h, "compression")
    assert validate_edge(s, t, edge) == []


def test_compress_rejects_images_outside_B():
    u = universe()
    s = ExtendedEquation(join_blocks([w("ab"), w("b^a^")]), u.A, ())
    with pytest.raises(InvalidTransition):
        compress(s, Endo({u.seed(0): (1, 9)}), u.A | {u.seed(0), u.seed(0) + 1}, u.A)


def test_final_compression_maps_seed_to_solution():
    u = universe()
    W = join_blocks([w("aab"), w("aaab"), w("aaab"), w("b^a^a^a^"), w("b^a^a^a^"), w("b^a^a^")])
    s = ExtendedEquation(W, u.A, ())
    t, h = final_compress(s, u, 1)
    c1 = u.seed(0)
    assert h(c1) == w("aab")
    assert describe_endo(h, u).startswith("c1->aab")
    edge = Edge(s.key, t.key, h, "final-compression")
    assert validate_edge(s, t, edge, universe=u) == []
    with pytest.raises(InvalidTransition):
        final_compress(t, u, 1)


def test_forward_property_for_a_pop():
    s = linear_state()
    spec = SubstitutionSpec("pop", -1, (1,))
    t = apply_substitution(s, spec, {-1: NF(1, 3)})
    edge = Edge(s.key, t.key, IDENTITY, "substitution", spec)
    assert check_forward(edge, s.W, t.W, {-1: w("aab"), -2: w("b^a^a^")},
                         {-1: w("ab"), -2: w("b^a^")}, {})
    assert not check_forward(edge, s.W, t.W, {-1: w("aab"), -2: w("b^a^a^")},
                             {-1: w("aab"), -2: w("b^a^a^")}, {})
    assert validate_edge(s, t, edge) == []
    assert edge.describe(universe()) == "X -> aX"


def test_markers_survive_substitution():
    s = linear_state()
    t = apply_substitution(s, SubstitutionSpec("pop", -1, (1,)), {-1: NF(1, 3)})
    assert t.W.count(HASH) == s.W.count(HASH)
