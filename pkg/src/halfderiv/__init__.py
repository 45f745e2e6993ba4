"""Exact half-derivation spaces and transposed Poisson structures for
graded Lie algebras defined by closed-form structure constants."""

__version__ = "0.1.0"

from .scalars import Poly, Rational, Scalar, format_scalar, parse_scalar
from .groups import GroupElement, GroupSpec, standard_group
from .algebra import AlgebraSpec, BasisSymbol, LinComb
from .catalog import catalog, CATALOG_NAMES, delta_trivial
from .derivations import (
    DerivationProblem,
    LinearSystem,
    SolutionSpace,
    Window,
    assemble,
    dense_nullspace,
    enumerate_window,
    interior_basis,
    interior_rank,
    make_window,
    nullspace,
    solve,
    solve_all_degrees,
    verify_map,
)
from .dsl import compile_file, compile_text, parse, pretty

__all__ = [name for name in dir() if not name.startswith("_")]
