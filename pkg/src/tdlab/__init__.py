"""Policy-evaluation laboratory for linear TD(lambda) with arbitrary features.

The package splits into an exact side and a sampled side.  The exact
side (``mdp``, ``oracle``) builds policy chains, trace-weighted
operators, the TD linear systems, the feature split that isolates the
all-ones direction, and the affine solution sets with projections and
negative-definiteness margins.  The sampled side (``learners``, ``sa``,
``experiments``) runs the two TD(lambda) update rules and the generic
stochastic-approximation loop, tracks squared distance to the solution
set, and reproduces the convergence experiments.  ``cli`` exposes
everything as the ``tdlab`` command.
"""

from .errors import (
    ConfigError,
    EmptyWindow,
    InconsistentSystem,
    InvalidLambda,
    NonFiniteUpdate,
    NotAperiodic,
    NotIrreducible,
    SingularSystem,
    TdLabError,
    ZeroFeatureMatrix,
)
from .mdp import (
    Policy,
    PolicyChain,
    TabularMdp,
    differential_value,
    discounted_value,
    induce_chain,
    stationary_distribution,
)
from .oracle import (
    AffineSet,
    FeatureDecomposition,
    FeatureMatrix,
    LambdaOperators,
    TdSystem,
    TildeSystem,
    ar_matrices,
    as_feature_matrix,
    combined_subspace_basis,
    distance_sq,
    feature_decomposition,
    kernel_basis,
    lambda_operators,
    lyapunov,
    neg_def_margin,
    numerical_rank,
    ones_in_col_space,
    oracle_report,
    pinv,
    project_affine,
    row_space_basis,
    solution_set,
    stationary_trace_mean,
    td_matrices,
    tilde_margin_sweep,
    tilde_system,
)
from .learners import (
    LearnerState,
    LrSchedule,
    schedule_at,
    step_average,
    step_discounted,
    trace_bound,
)
from .sa import (
    MeanField,
    SaProblem,
    SaTrajectory,
    TdTraceDriver,
    average_update_map,
    discounted_update_map,
    drift_probe,
    lipschitz_probe,
    mixing_time,
    monte_carlo_mean_update,
    parallel_map,
    run_sa,
)
from .experiments import (
    BOYAN_FEATURES,
    ExperimentConfig,
    RunRecord,
    boyan_chain,
    build_instance,
    checkpoint_grid,
    empirical_mean_update,
    empirical_trace_mean,
    rate_fit,
    read_csv,
    run_experiment,
    solve_instance,
    write_csv,
    write_metadata,
)

__version__ = "0.1.0"
