"""Density power divergence estimation and robust testing for independent
non-homogeneous observations.

Submodules
----------
quadform
    Tail probabilities and quantiles of weighted noncentral chi-square sums.
models
    Per-observation model families (normal linear, Poisson log, Bernoulli
    logit) and their tau-weighted integrals.
estimate
    Minimum density power divergence estimation and sandwich covariances.
restrict
    Restricted estimation under linear constraints on the coefficients.
hyptest
    Divergence-based test statistics, null laws, power and sample size.
influence
    Influence-function diagnostics for estimators and tests.
simulate
    Deterministic replication harness for size/power experiments.
"""

from .quadform import QuadFormDist, SeriesControl, chisq_cdf, chisq_quantile
from .models import (
    BernoulliLogitModel,
    Dataset,
    NormalLinearModel,
    ParamVector,
    PoissonLogModel,
    design_diagnostics,
)
from .estimate import MdpdeFit, fit_mdpde, hn_gradient, hn_objective, sandwich
from .restrict import LinearConstraint, RmdpdeFit, fit_rmdpde, rmdpde_scale_variance

__all__ = [
    "QuadFormDist",
    "SeriesControl",
    "chisq_cdf",
    "chisq_quantile",
    "Dataset",
    "ParamVector",
    "NormalLinearModel",
    "PoissonLogModel",
    "BernoulliLogitModel",
    "design_diagnostics",
    "MdpdeFit",
    "fit_mdpde",
    "hn_objective",
    "hn_gradient",
    "sandwich",
    "LinearConstraint",
    "RmdpdeFit",
    "fit_rmdpde",
    "rmdpde_scale_variance",
]

__version__ = "0.1.0"
