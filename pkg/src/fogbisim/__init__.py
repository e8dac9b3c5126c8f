"""Bisimilarity workbench for first-order grammars over regular terms."""

from .bisim import OMEGA, AtLeast, EqLevel, Finite, covers, eqlevel, expansions, find_eq_witness
from .game import GameConfig, play, play_v3, replay, validate_transcript
from .grammar import Grammar, constants, parse_grammar, reduce_arities, sink_words
from .terms import Subst, TermStore

__all__ = [
    "OMEGA", "AtLeast", "EqLevel", "Finite", "covers", "eqlevel", "expansions", "find_eq_witness",
    "GameConfig", "play", "play_v3", "replay", "validate_transcript",
    "Grammar", "constants", "parse_grammar", "reduce_arities", "sink_words",
    "Subst", "TermStore",
]
