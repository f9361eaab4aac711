"""Jost functions, Jacobi matrices and their meromorphic continuations.

Numerical toolkit for the Geronimo-Case recursion, the Szegő recursion and
the second Szegő map, m-function stripping, exponential-sum (Prony) series
extraction, pole-set semigroups and annulus analyticity checks.
"""
from jostlab.core import (
    AmbiguityError,
    AsymptoticSeries,
    ConvergenceError,
    InputError,
    JacobiParameters,
    JostlabError,
    NumericalError,
    PoleError,
    PoleSet,
    PowerSeriesModel,
    RegionError,
    SeriesTerm,
    VerblunskyCoefficients,
    parse_input,
    realize_tail,
    serialize,
)

__version__ = "0.1.0"
