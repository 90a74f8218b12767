"""Volumes and relative volumes of parent Hamiltonians."""

__version__ = "0.1.0"

from .analytic import (
    ManifoldSpec,
    TIBoundSpec,
    delta_ti_relative_bound,
    epsilon_volume,
    hypersurface,
    i1,
    i2_complex,
    i2_real,
    log_xi,
    relative_volume_paper,
    relative_volume_stirling,
    ti_bound,
    total_volume,
)
from .betafit import BetaFitResult, fit_beta_cdf, regularized_incomplete_beta, small_eps_coefficient
from .ensembles import EnsembleSpec, HermitianOperator, PureState
from .logvalue import LogValue
from .montecarlo import EmpiricalCurve, compare_with_paper, estimate_unrestricted, exact_haar_tail, wilson_interval
from .spectra import HitCriterion, decompose, ground_state, hit
