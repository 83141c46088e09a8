"""Robust estimation and score tests for models known through their mean and covariance.

The observations are treated as Gaussian with mean ``mu(theta)`` and
covariance ``Sigma(theta)``; the parameter is estimated by minimizing the
density power divergence with tuning parameter ``tau >= 0`` (``tau = 0`` is
the Gaussian maximum-likelihood-type estimator, larger values downweight
outlying observations).
"""

from .asymptotics import (
    AsymptoticMatrices,
    RestrictedCovariance,
    delta_tau,
    grad_h_fd,
    hessian_h_fd,
    matrix_j,
    matrix_k,
    mc_score_moments,
    mc_weight_mean,
    mean_score,
    noncentrality,
    psi,
    psi_matrix,
    restricted_covariance,
    score_u,
)
from .distributions import (
    MixtureSpec,
    RngStream,
    chisq_cdf,
    chisq_quantile,
    chisq_sf,
    sample_contaminated_exponential,
    sample_model_normal,
    sample_poisson,
)
from .errors import (
    DomainError,
    DpdgError,
    InvalidConstraint,
    InvalidTau,
    NoConvergence,
    NotSPD,
    RankDeficientConstraint,
    SingularMatrix,
)
from .estimators import EstimateReport, fit_mdpdge, fit_rmdpdge, kkt_residual
from .influence import InfluenceCurve, influence_curve, influence_restricted, influence_unrestricted
from .kernels import BACKEND
from .models import (
    ConstraintSet,
    MeanCovModel,
    constraint_eval,
    exponential_model,
    fix_constraint,
    get_preset,
    model_derivs,
    model_eval,
    mvnormal_model,
    no_constraint,
    normal1d_model,
    point_constraint,
    poisson_model,
)
from .objective import DpdConstants, dpd_constants, gaussian_loglik, objective_h
from .rao import (
    TestReport,
    mdpde_rao_exponential,
    power_approximation,
    rao_composite,
    rao_exponential,
    rao_poisson,
    rao_statistic,
)
from .simulation import MCConfig, MCResult, estimate_rejection_rate, reproduce_tables, run_grid

__version__ = "0.1.0"
