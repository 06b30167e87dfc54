"""Bounds for the Gaussian core model.

Lower bounds on the energy of point configurations in R^n interacting through
exp(-alpha t^2), the matching upper bounds, the interpolated auxiliary
function behind the lower bound, and energies of reference lattices.
"""
from ._kernels import BACKEND
from .bounds import (
    FOUR_PI_OVER_E,
    PI_E,
    AsymptoticProfile,
    AsymptoticRates,
    BoundParams,
    BoundResult,
    asymptotic_rate,
    conditional_expectation_bound,
    dual_cap,
    expectation_bound,
    gaussian_profile,
    general_truncated_expectation,
    inverse_power_lower_bound,
    inverse_power_upper_bound,
    main_lower_bound,
    normalized_main_bound,
    profile_agreement,
)
from .errors import ConvergenceError, DomainError, GCMError, PrecisionError
from .interp import (
    AuxFunction,
    alg_identity_residual,
    aux_eval,
    bgf_residual,
    build_aux,
    lp_bound_via_aux,
    psd_sample_check,
    verify_minorant,
)
from .lattices import LatticeModel, lattice_energy, lattice_model, ramanujan_tau, theta_coefficients
from .specfun import (
    AiryZeroApprox,
    BesselZeroTable,
    airy_zero,
    ball_radius,
    bessel_j,
    bessel_zeros,
    log_ball_volume,
    log_gamma,
    log_reg_gamma_upper,
    reg_gamma_upper,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
