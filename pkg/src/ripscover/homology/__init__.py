"""Persistent homology over prime fields."""
from .barcode import (
    Barcode,
    PersistenceDiagram,
    ReducedBetti,
    barcode,
    check_alpha_acyclic,
    diagram_svg,
    reduced_betti,
    reduced_intervals,
)
from .bottleneck import bottleneck, essential_bottleneck, finite_bottleneck
from .field import Fp, check_prime, inverse_table, is_prime, nullspace_mod_p, rank_mod_p, row_reduce, solve_mod_p
from .reduction import BoundaryMatrix, Reduction, boundary_matrix, reduce, reduce_coboundary, reduce_columns

__all__ = [
    "Barcode",
    "BoundaryMatrix",
    "Fp",
    "PersistenceDiagram",
    "ReducedBetti",
    "Reduction",
    "barcode",
    "bottleneck",
    "boundary_matrix",
    "check_alpha_acyclic",
    "check_prime",
    "diagram_svg",
    "essential_bottleneck",
    "finite_bottleneck",
    "inverse_table",
    "is_prime",
    "nullspace_mod_p",
    "rank_mod_p",
    "reduce",
    "reduce_coboundary",
    "reduce_columns",
    "reduced_betti",
    "reduced_intervals",
    "row_reduce",
    "solve_mod_p",
]
