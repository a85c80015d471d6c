"""Numerical and exact-arithmetic laboratory for a D-color coupled matrix model.

Core subpackages: closed-form leading-order quantities (``model``),
exact-rational series (``series``), the finite-N saddle solver
(``saddle``), the Hermite moment dictionary (``observables``), and the
Schwinger-Dyson verifier (``sd``).  A FastAPI service (``service``) wraps
everything behind typed endpoints and the CLI (``cli``) is a thin client
of that service.
"""

from .model import (
    ALPHA_AT_ZERO_COUPLING,
    G2_AT_ZERO_COUPLING,
    LOQuantities,
    ModelParams,
    SemicircleLaw,
    alpha_lo,
    g2_lo,
    lo_quantities,
    log_z_saddle,
    nlo_resolvent,
    semicircle_law,
    total_resolvent,
)
from .series import (
    RationalSeries,
    catalan_oracle,
    fixed_point_check,
    g2_series,
    planar_moment_solve,
    tutte_series,
)
from .saddle import (
    ReducedSpectrum,
    SaddleSolution,
    SolverConfig,
    Spectrum,
    compare_to_nlo,
    hermite_roots,
    nlo_reduced_solve,
    saddle_residual,
    solve_newton,
)
from .observables import (
    HermiteBasisMap,
    empirical_ks,
    hermite_eval,
    matrix_from_theta,
    monomial_to_hermite,
    theta_from_matrix,
)
from .sd import (
    CorrelatorEstimate,
    SDReportEntry,
    ShiftedModel,
    correlator_mc,
    correlator_quadrature,
    factorization_check,
    sd_residual_exact,
    sd_residual_leading,
    tensor_side_check,
)

__version__ = "0.1.0"

SCHEMA_VERSION = "melonfield/1"
