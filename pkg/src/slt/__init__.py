"""Hybrid robust-parsing and anytime-translation workbench."""

from .grammar import Grammar, load_grammar, serialize_grammar, unify
from .lattice import Lattice, conflate_nbest, linear_lattice
from .pipeline import ParseConfig, StageOutputs, parse_staged

__all__ = [
    "Grammar", "load_grammar", "serialize_grammar", "unify",
    "Lattice", "conflate_nbest", "linear_lattice",
    "ParseConfig", "StageOutputs", "parse_staged",
]

__version__ = "0.1.0"
