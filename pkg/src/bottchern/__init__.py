"""Simplex-integral transgression cochains and polylogarithm identities.

Numerical companions to the transgressed Chern character: adaptive simplex
quadrature, group cochains from metric paths, the explicit minor-sum
integrand of a vector tuple, the Bloch-Wigner dilogarithm oracle, and an
exterior-algebra verifier for the local transgression identities.
"""

__version__ = "0.1.0"

from .dilog import CrossRatioConvention, bloch_wigner, cross_ratio, li2
from .grassmann import (VectorTuple, denominator, dilog_presentation,
                        f_invariant, grassmann_cochain, integrand_equivalence,
                        numerator_coeff, numerator_coeff_reference)
from .linalg import congruence, det, minor_det, solve, subsets
from .simplex import (QuadratureConfig, QuadratureResult, SimplexPoint,
                      SubSimplex, base_rule, integrate, subdivide)
from .transgression import (GroupTuple, MetricPath, borel_cochain,
                            chern_cochain, cocycle_defect, odd_trace_coeff)

__all__ = [
    "CrossRatioConvention", "GroupTuple", "MetricPath", "QuadratureConfig",
    "QuadratureResult", "SimplexPoint", "SubSimplex", "VectorTuple",
    "base_rule", "bloch_wigner", "borel_cochain", "chern_cochain",
    "cocycle_defect", "congruence", "cross_ratio", "denominator", "det",
    "dilog_presentation", "f_invariant", "grassmann_cochain", "integrate",
    "integrand_equivalence", "li2", "minor_det", "numerator_coeff",
    "numerator_coeff_reference", "odd_trace_coeff", "solve", "subdivide",
    "subsets",
]
