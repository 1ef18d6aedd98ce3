import time

import pytest

from conftest import universe, w
from golden import five_var_milestones, five_var_trace
from edtolsolve.alphabet import HASH
from edtolsolve.equation import validate_state
from edtolsolve.search import (explore, has_cycle, initial_states, prepare, trim,
                               witness_trace)
from edtolsolve.transitions import validate_edge


def run(U, V, letters="ab", **kw):
    prob = prepare(w(U), w(V), universe(letters), **kw)
    nfa = explore(prob)
    return prob, nfa, trim(nfa)


def test_linear_automaton_is_a_single_path():
    prob, nfa, t = run("aX", "aaab")
    assert nfa.status == "complete"
    assert (len(t.states), len(t.edges)) == (6, 5)
    assert not has_cycle(t)
    kinds = sorted(e.kind for e in t.edges)
    assert kinds.count("final-compression") == 1


def test_unsolvable_has_no_states():
    _, nfa, t = run("a", "b")
    assert nfa.status == "complete" and not t.states


def test_commutation_has_cycle():
    _, nfa, t = run("aX", "Xa", letters="a")
    assert nfa.status == "complete"
    assert has_cycle(t)


def test_every_state_and_edge_validates():
    prob, nfa, t = run("aX", "Xa", letters="a")
    for s in nfa.states.values():
        assert validate_state(s, prob.bounds, prob.universe.A) == []
    for e in nfa.edges:
        assert validate_edge(nfa.states[e.src], nfa.states[e.dst], e, prob.winit,
                             prob.universe) == []
    assert nfa.stats["invalid"] == 0


def test_caps_mark_status():
    _, nfa, _ = run("aX", "Xa", letters="a", max_states=3)
    assert nfa.status == "capped"
    _, nfa, _ = run("aX", "Xa", letters="a", max_depth=1)
    assert nfa.status == "capped"


def test_initial_state_budget():
    prob = prepare(w("XaYbaXP"), w("bYbbbZQ"), universe(), (-1, -3, -5, -7, -9))
    budget = {"nodes": 500}
    t = time.time()
    list(initial_states(prob, budget))
    assert budget.get("exhausted")
    assert time.time() - t < 5


def test_initial_states_respect_constraints():
    prob = prepare(w("aX"), w("aaab"), universe())
    states = list(initial_states(prob))
    assert len(states) == 1
    assert states[0].mu[-1] == (1, 3)


def test_variables_without_equation_have_all_values():
    prob = prepare(w("aX"), w("Xa"), universe("a"))
    firsts = {s.mu[-1] for s in initial_states(prob)}
    assert (0, 0) in firsts and (1, 1) in firsts


def test_linear_witness_trace():
    prob = prepare(w("aX"), w("aaab"), universe())
    tr = witness_trace(prob, {-1: w("aab")})
    assert len(tr.steps) == 5
    assert [st.edge.kind for st in tr.steps][-1] == "final-compression"
    assert tr.steps[-1].summary.startswith("c1->aab")
    assert tr.steps[-1].state.W.count(HASH) == prob.winit.W.count(HASH)


def test_witness_rejects_non_solutions():
    prob = prepare(w("aX"), w("aaab"), universe())
    with pytest.raises(ValueError):
        witness_trace(prob, {-1: w("ab")})
    with pytest.raises(ValueError):
        witness_trace(prob, {-1: w("aa^ab")})


def test_witness_of_trivial_equation():
    prob = prepare(w("X"), w("a"), universe("a"))
    tr = witness_trace(prob, {-1: w("a")})
    kinds = [st.edge.kind for st in tr.steps]
    assert "substitution" in kinds and kinds[-1] == "final-compression"


def test_witness_path_is_in_the_automaton():
    prob, nfa, t = run("aX", "aaab")
    tr = witness_trace(prepare(w("aX"), w("aaab"), universe()), {-1: w("aab")})
    assert {st.edge for st in tr.steps} == set(t.edges)


def test_five_var_milestones():
    t = time.time()
    _, tr = five_var_trace()
    m = five_var_milestones(tr)
    assert time.time() - t < 5
    assert m["first_lambda_b"] == "Lambda_b = {4, 5}"
    assert m["first_lambda_a"] == "Lambda_a = {}"
    assert m["first_x_b"] == "X_b = {X, Y}"
    assert m["partition"].startswith("partition L = {a^, b, c4b, c5b}")
    assert "{a^, b, c4b, c5b}" in m["candidates"]
    assert not m["b_squares_after_block"]
