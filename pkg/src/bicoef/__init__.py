"""Uniform coefficient asymptotics for bivariate meromorphic generating functions.

Given ``F = G/H`` with a strictly minimal simple zero of ``H``, the package
estimates ``[z^r w^s] F`` along directions ``r/s`` near a critical direction,
including the case where the amplitude changes degree there.
"""

from .errors import BicoefError
from .expansion import Analysis, EstimateReport, estimate, leading_order, split_amplitude
from .oracle import coeff_table, compare, delannoy, lagrange_exact
from .problem import Config, Problem, delannoy_problem, lagrange_problem
from .quadrature import sigma_quadrature

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "BicoefError",
    "Config",
    "EstimateReport",
    "Problem",
    "coeff_table",
    "compare",
    "delannoy",
    "delannoy_problem",
    "estimate",
    "lagrange_exact",
    "lagrange_problem",
    "leading_order",
    "sigma_quadrature",
    "split_amplitude",
]
