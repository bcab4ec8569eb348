"""Quasi-Einstein metric profiles on circle-bundle hypersurface families.

Construct the closed-form steady, expanding and shrinking profiles from
bundle data, solve the algebraic and root-finding existence conditions,
and verify each construction by residual substitution and exact evaluation
of the sign obstruction integrals.
"""

from .bundle import (BundleInput, BundleSpec, Case, ChiVector, FanoFactor,
                     ValidationReport, enumerate_chi, load_bundle_json,
                     validate_bundle)
from .construct import (MetricProfile, a_coeff, build_alpha, build_V,
                        closing_integral, closing_scale, closing_sweep,
                        construct_expanding, construct_shrinking,
                        construct_steady, kappa0_from_consistency,
                        s_star_compact)
from .errors import HypothesisError, InputError, NumericalError, QemError
from .genpoly import GenPoly, GenPolyWithConst, RationalPoly, integral_quad
from .invariants import (ObstructionResult, admissibility_integral,
                         find_admissible_chi, futaki_integral,
                         limit_infinity_scaled, limit_zero_integral)
from .verifier import (alpha_quadrature, asymptotics_report, boundary_check,
                       completeness_diagnostic, residuals, t_of_s,
                       time_form_residuals, write_profile_csv)

__version__ = "0.1.0"

__all__ = [
    "BundleInput", "BundleSpec", "Case", "ChiVector", "FanoFactor",
    "ValidationReport", "enumerate_chi", "load_bundle_json",
    "validate_bundle",
    "MetricProfile", "a_coeff", "build_alpha", "build_V",
    "closing_integral", "closing_scale", "closing_sweep",
    "construct_expanding", "construct_shrinking", "construct_steady",
    "kappa0_from_consistency", "s_star_compact",
    "HypothesisError", "InputError", "NumericalError", "QemError",
    "GenPoly", "GenPolyWithConst", "RationalPoly", "integral_quad",
    "ObstructionResult", "admissibility_integral", "find_admissible_chi",
    "futaki_integral", "limit_infinity_scaled", "limit_zero_integral",
    "alpha_quadrature", "asymptotics_report", "boundary_check",
    "completeness_diagnostic", "residuals", "t_of_s",
    "time_form_residuals", "write_profile_csv",
    "__version__",
]
