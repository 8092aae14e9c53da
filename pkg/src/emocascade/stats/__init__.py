"""Regression battery: mixed models, fixed effects, Hausman, mediation, t-test."""

from .design import INTERCEPT, DesignMatrix, FitResult, check_rank, fit_ols
from .mediation import MediationReport, classify, mediation_analysis
from .mixed import MixedLM, fit_random_intercept, fit_random_slopes, profile_loglik
from .panel import fit_fixed_effects, fit_lsdv, hausman_test
from .ttest import welch_t_test

__all__ = [
    "INTERCEPT",
    "DesignMatrix",
    "FitResult",
    "MediationReport",
    "MixedLM",
    "check_rank",
    "classify",
    "fit_fixed_effects",
    "fit_lsdv",
    "fit_ols",
    "fit_random_intercept",
    "fit_random_slopes",
    "hausman_test",
    "mediation_analysis",
    "profile_loglik",
    "welch_t_test",
]
