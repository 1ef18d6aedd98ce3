"""Golden instances shared by the module tests and the acceptance suite."""

from conftest import universe, w
from edtolsolve.search import prepare, witness_trace

FIVE_VAR_U, FIVE_VAR_V = "XaYbaXP", "bYbbbZQ"
FIVE_VAR_SIGMA = {"X": "bbbbb", "Y": "bbbba", "Z": "bab", "P": "abbba", "Q": "abbbbbabbba"}
VAR_IDS = {"X": -1, "Y": -3, "Z": -5, "P": -7, "Q": -9}


def five_var_trace():
    u = universe()
    vs = (-1, -3, -5, -7, -9)
    prob = prepare(w(FIVE_VAR_U), w(FIVE_VAR_V), u, vs, compress_above=0)
    sigma = {VAR_IDS[k]: w(v) for k, v in FIVE_VAR_SIGMA.items()}
    return prob, witness_trace(prob, sigma)


def has_square(word, letter) -> bool:
    return any(word[i] == word[i + 1] == letter for i in range(len(word) - 1))


def five_var_milestones(tr) -> dict:
    """The first block phase and the first pair-compression choice."""
    notes = [n for st in tr.steps for n in st.notes]
    block_end = next(st for st in tr.steps if any(n.startswith("partition L") for n in st.notes))
    return {
        "lambda_b": notes[notes.index("Lambda_b = {4, 5}")] if "Lambda_b = {4, 5}" in notes else None,
        "first_lambda_b": next(n for n in notes if n.startswith("Lambda_b")),
        "first_lambda_a": next(n for n in notes if n.startswith("Lambda_a")),
        "first_x_b": next(n for n in notes if n.startswith("X_b =")),
        "partition": next(n for n in notes if n.startswith("partition L")),
        "candidates": next(n for n in notes if n.startswith("partition candidates")),
        "b_squares_after_block": has_square(block_end.state.W, 3) or has_square(block_end.state.W, 4),
        "uncrossed": [n for n in notes if n.startswith("uncross")][:3],
    }
