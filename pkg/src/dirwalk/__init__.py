"""Random walks on stochastic matrices and checks of their Dirichlet limits."""

from . import errors
from ._accel import backend, set_backend, set_threads, use_backend
from .applications import (
    AffineFrame,
    ExchangeChain,
    PollingWalk,
    SimplexCascade,
    beta_params,
    exchange_stationary_test,
    exchange_step,
    polling_stationary_test,
    polling_step,
    simplices_batch,
    simplices_run,
    t_r,
)
from .characterization import (
    C1Verdict,
    charfn_check,
    check_c1,
    check_dirichlet_fixed_point,
    check_pushforward,
    dirichlet_moment,
    estimate_limit_params,
    gamma_moment,
)
from .core import (
    NonNegVector,
    ParamMatrix,
    ParamVector,
    ProbVector,
    StochasticMatrix,
    check_balance,
    mat_product,
    row_col_sums,
    row_spread,
    validate_stochastic,
)
from .ensembles import (
    Ensemble,
    composite,
    cyclic,
    cyclic_param_matrix,
    dirichlet,
    explicit_mixture,
    from_dict,
    leader,
    point_mass,
    polling_cycle,
)
from .products import (
    PositivityReport,
    ProductTrace,
    iterate_until_converged,
    left_product,
    left_products,
    limit_rows,
    positivity_time,
    right_products,
)
from .rng import RngStream
from .sampling import sample_dirichlet, sample_gamma, sample_gamma_matrix, sample_gamma_vector, sample_matrix
from .stats import (
    TestReport,
    energy_distance_test,
    ks_test,
    moment_battery,
    reg_inc_beta,
    reg_inc_gamma,
)

__version__ = "0.1.0"
