"""Numerical verification of variance-based uncertainty relations on finite-dimensional systems."""

from .qmcore import (
    HermitianObservable,
    OrthonormalFrame,
    StateVector,
    complete_basis,
    expectation,
    random_orthogonal_state,
    random_state,
    variance,
)
from .operators import oscillator_triple, parse_observable, spin_operators
from .pairbounds import BoundReport, PairMoments, pair_moments
from .triplebounds import TripleMoments, triple_moments

__version__ = "0.1.0"

__all__ = [
    "HermitianObservable",
    "OrthonormalFrame",
    "StateVector",
    "complete_basis",
    "expectation",
    "random_orthogonal_state",
    "random_state",
    "variance",
    "oscillator_triple",
    "parse_observable",
    "spin_operators",
    "BoundReport",
    "PairMoments",
    "pair_moments",
    "TripleMoments",
    "triple_moments",
]
