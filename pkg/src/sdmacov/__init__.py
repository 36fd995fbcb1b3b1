"""Coverage, spatial throughput and critical density for SDMA ultra-dense
small-cell networks under multi-slope pathloss, with an independent Monte
Carlo point-process simulator for cross-validation."""

from .analytic import (
    BracketError,
    CoverageNumericError,
    CoverageResult,
    NetworkConfig,
    ScalingViolationError,
    SweepResult,
    coverage_approx,
    coverage_exact,
    coverage_lower_full,
    critical_density_closed,
    critical_density_numeric,
    laplace_exponent_derivs,
    scaling_fit,
    spatial_throughput,
)
from .montecarlo import (
    CpEstimate,
    SimParams,
    TrialOutcome,
    WindowTooSmallError,
    active_backend,
    default_window_radius,
    estimate_cp,
    run_trial,
    sample_gamma,
    sample_ppp,
    sir_samples,
)
from .pathloss import (
    BreakpointOrderError,
    FinalExponentError,
    NonMonotoneExponentsError,
    PathlossModel,
    loss_at,
    make_pathloss,
)
from .specfun import (
    SeriesConvergenceError,
    complete_bell,
    hyp2f1,
    omega,
    rising_factorial,
)

__version__ = "0.1.0"
