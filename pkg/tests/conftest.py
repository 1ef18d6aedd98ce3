import pytest

from edtolsolve.alphabet import Universe

LETTERS = {"a": 1, "a^": 2, "b": 3, "b^": 4, "c": 5, "c^": 6}
VARS = {"X": -1, "X^": -2, "Y": -3, "Y^": -4, "Z": -5, "Z^": -6, "P": -7, "P^": -8, "Q": -9, "Q^": -10}


def w(text: str) -> tuple:
    """Space-free shorthand: 'aXb^' -> (1, -1, 4)."""
    table = {**LETTERS, **VARS}
    out = []
    i = 0
    while i < len(text):
        tok = text[i]
        i += 1
        if i < len(text) and text[i] == "^":
            tok += "^"
            i += 1
        out.append(table[tok])
    return tuple(out)


def universe(letters="ab") -> Universe:
    names = {-1: "X", -3: "Y", -5: "Z", -7: "P", -9: "Q"}
    return Universe(list(letters), 1, var_names=names)


@pytest.fixture
def uab():
    return universe("ab")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
