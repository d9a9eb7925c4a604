"""Randomized row-action solvers for consistent linear systems and
linear feasibility, with penalty and multiplier step variants plus the
analysis tooling to verify their per-step contraction behavior."""

from .analysis import (
    AdaptiveStepReport,
    CurveReport,
    ExpectedStepReport,
    HoffmanEstimate,
    NoEstimateError,
    RateConstants,
    adaptive_step_report,
    exact_expected_step,
    hoffman_estimate,
    instance_rate_factor,
    lyapunov_lf,
    lyapunov_ls,
    monte_carlo_error_curve,
    project_affine,
    rate_constants,
)
from .linalg import (
    ConvergenceError,
    DenseMatrix,
    EigenResult,
    InconsistentSystemError,
    gram_matrix,
    jacobi_eigen_sym,
    lambda_min_variants,
    least_norm_solution,
    matvec,
    row_dot,
)
from .problems import (
    Problem,
    ProblemFormatError,
    ProblemKind,
    generate_consistent_ls,
    generate_feasible_lf,
    load_problem,
    normalize_rows,
    save_problem,
)
from .projection import distance_to_feasible, project_polyhedron
from .sampling import RowSampler, build_sampler
from .solvers import (
    Method,
    NumericFailureError,
    SolverConfig,
    SolverState,
    advance_rho,
    rak_step_lf,
    rak_step_ls,
    rk_step_lf,
    rk_step_ls,
    rpk_step_lf,
    rpk_step_ls,
    run_solver,
)
from .traces import RunSummary, TraceFormatError, TraceRecord, parse_trace_csv

__version__ = "0.1.0"
