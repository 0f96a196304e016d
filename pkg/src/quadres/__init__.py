"""quadres: resonance-method toolkit for quadratic Dirichlet L-functions."""

from .arith import (
    Factorization,
    FundamentalDiscriminant,
    SquarefreeSplit,
    batch_character,
    enumerate_fundamental_discriminants,
    factorize,
    fundamental_d_values,
    is_fundamental_discriminant,
    kronecker,
    orthogonality_mass,
    sieve_primes,
    squarefree_decompose,
)
from .consts import (
    ConstantReport,
    EULER_GAMMA,
    ZETA2,
    all_constant_reports,
    alpha_b,
    alpha_sigma_b,
    choose_c,
    const_C1,
    const_C2,
    const_c2_integral,
    const_c3,
    const_cprime,
    proportion_exponent,
    tau_eta,
    theta_b,
    threshold_c,
)
from .lfunc import (
    DEFAULT_L_BUDGET,
    LValueRecord,
    l_half,
    l_half_series_oracle,
    l_one_oracle,
    l_one_truncated,
    log_l_sigma_approx,
    prime_sum_sigma,
)
from .specfn import (
    BudgetError,
    NonConvergenceError,
    PrecisionBudget,
    integrate,
    lower_incomplete_gamma,
    upper_incomplete_gamma,
    weight_U,
    weight_U_contour,
)
from .resonator import (
    BsParams,
    EulerParams,
    WindowOverride,
    a_n_product,
    bs_enumerate,
    bs_membership,
    bs_psi,
    bs_resonator_value,
    bs_support_primes,
    euler_r_coefficient,
    euler_resonator_value,
    mcz_scz,
    square_pair_sum,
)
from .experiments import (
    charsum_empirical,
    extreme_search,
    littlewood_ceiling,
    proportion_phi,
    resonance_ratio,
    residual_scaling,
)

__version__ = "0.1.0"
