"""Capacity of entanglement for fermionic Gaussian states and the quadratic SYK model.

Submodules
----------
specfun
    Gamma, polygamma, Jacobi polynomials, generalized and double
    hypergeometric series.
quadrature
    Adaptive Gauss-Legendre integration in one and two dimensions.
measures
    Per-mode capacity, entanglement entropy and second Renyi entropy.
gaussian
    Averages over Haar-random Gaussian states: exact finite sums,
    quadrature, variance and Monte Carlo.
syk2_analytic
    Thermodynamic-limit coefficients for the quadratic complex SYK model.
syk2_numeric
    Monte Carlo over GUE Hamiltonians and their eigenstates.
cli
    The ``coe`` command-line tool.
"""

from .errors import (
    ConvergenceError,
    DomainError,
    NumericalError,
    PoleError,
    PrecisionError,
    RegionOfConvergenceError,
)
from .gaussian import (
    Bipartition,
    SpectrumSample,
    avg_coe_exact,
    avg_coe_oracle,
    density_rho,
    haar_sample_spectra,
    haar_sample_spectrum,
    kernel,
    page_curve,
    theta_basis,
    variance_coe,
)
from .measures import ModeMeasures, capacity, capacity_u, entropy, mode_measures, renyi2
from .quadrature import QuadratureResult, integrate_1d, integrate_2d
from .specfun import KdfParams, SeriesEvaluation, harmonic, hyp_pfq, jacobi_p, kdf, log_gamma, polygamma
from .syk2_analytic import (
    HALF_FILLING_COE,
    HALF_FILLING_EE,
    HALF_FILLING_RENYI2,
    CoefficientCurve,
    ConvergenceReport,
    chaotic_coe,
    coe_coefficient,
    coefficient_closed_form,
    coefficient_curve,
    coefficient_quadrature,
    coefficient_series,
    convergence_report,
    entropy_coefficients,
    replica_coefficient_half,
)
from .syk2_numeric import (
    EigenSystem,
    EnsembleStats,
    FitError,
    HermitianMatrix,
    Occupation,
    correlation_matrix,
    deficit_and_fit,
    eigenstate_measures,
    eigh,
    ensemble_average,
    sample_gue,
    sample_occupation,
)

__version__ = "0.1.0"
