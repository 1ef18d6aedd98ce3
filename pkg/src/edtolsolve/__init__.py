"""Solver for word equations with involution and for free-group equations.

Solution sets are produced as trimmed automata whose edge labels are
endomorphisms, so they can be enumerated, classified and exported.
"""

from .alphabet import HASH, NF, Universe, bar, inv
from .edtol import (SolutionSet, classify, enumerate_solutions, export_automaton,
                    import_automaton, solve)
from .oracle import OracleQuery, brute_solutions
from .search import explore, prepare, trim, witness_trace

__version__ = "1.0.0"

__all__ = [
    "HASH", "NF", "Universe", "bar", "inv",
    "SolutionSet", "classify", "enumerate_solutions", "export_automaton",
    "import_automaton", "solve",
    "OracleQuery", "brute_solutions",
    "explore", "prepare", "trim", "witness_trace",
]
