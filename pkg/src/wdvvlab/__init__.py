"""wdvvlab: exact verification of WDVV potentials, reflection-group
discriminants, singularity-family discriminants and the coordinate
transformations relating them, over exact rational and algebraic-constant
arithmetic."""

from .kernel import (NotDivisible, Poly, PolyMatrix, RatFrac, Ring,
                     WeightVector, as_mpq, det, jacobian, matrix_invert,
                     resultant, weighted_degree)
from .algext import AlgebraicRelation, AlgElement
from .exprio import parse, parse_poly, render

__all__ = [
    "AlgElement", "AlgebraicRelation", "NotDivisible", "Poly", "PolyMatrix",
    "RatFrac", "Ring", "WeightVector", "as_mpq", "det", "jacobian",
    "matrix_invert", "parse", "parse_poly", "render", "resultant",
    "weighted_degree",
]

__version__ = "0.1.0"
