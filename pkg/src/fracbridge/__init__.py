"""Complex alpha-fractional Brownian bridge simulation and drift estimation."""

from .bridge import BridgePaths, bridge_euler, bridge_exact, omega_path, scaled_Y_path, simulate_bridge
from .chaos import ChaosReport, hermite_eval, hermite_poly, mc_chaos_checks
from .estimate import (
    ConsistencyConfig,
    EstimateRecord,
    LimitConfig,
    McSummary,
    classify_case,
    lse_continuous,
    lse_discrete,
    normalized_error,
    run_consistency_experiment,
    run_limit_experiment,
    simulate_G,
)
from .gauss import (
    BVFunction,
    ComplexPath,
    RealPath,
    SeedSpec,
    TimeGrid,
    fbm_covariance,
    inner_product_highH,
    inner_product_lowH,
    sample_complex_fbm,
    sample_fbm_cholesky,
    sample_fbm_circulant,
)
from .limitlaw import CRLaw, cr_density, cr_marginal_density, cr_radial_cdf, cr_sample, ks_statistic
from .special import (
    A_tilde_second_moment,
    LimitCase,
    ModelParams,
    Y_T_second_moment,
    cbeta,
    cgamma,
    cr_scale,
    lemma_a1_value,
    omega_T_second_moment,
    xi_T_second_moment,
    xtilde_T_second_moment,
)

__version__ = "0.1.0"
