"""Wald intervals, likelihood-ratio tests, and the score/Wilcoxon bridge.

score_test_binary is a diagnostic tool for a single binary covariate
under the logit link: it computes the score-test numerator S from the
pooled empirical CDF and certifies the exact midrank identity
(n/2) * S = R1 - n1 (n+1) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    MismatchedDataError,
    NonBinaryCovariateError,
    NotConvergedError,
    NotNestedError,
)
from .solver import ModelFit

__all__ = ["WilcoxonStats", "TestResult", "wald_interval", "likelihood_ratio_test",
           "score_test_binary"]


@dataclass(frozen=True)
class WilcoxonStats:
    midranks: np.ndarray
    R1: float
    n0: int
    n1: int

    @property
    def numerator(self) -> float:
        n = self.n0 + self.n1
        return self.R1 - self.n1 * (n + 1) / 2.0


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: int
    p_value: float


def wald_interval(fit: ModelFit, coefficient_index: int, level: float = 0.95):
    """Normal-theory CI for theta[coefficient_index] in (alphas, betas) order."""
    if not fit.converged:
        raise NotConvergedError("Wald interval requires a converged fit")
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    est = fit.theta_hat.flat()[coefficient_index]
    var = max(fit.vcov[coefficient_index, coefficient_index], 0.0)
    z = stats.norm.ppf(0.5 * (1 + level))
    half = z * np.sqrt(var)
    return est - half, est + half


def likelihood_ratio_test(full: ModelFit, reduced: ModelFit) -> TestResult:
    """2 * (logL_full - logL_reduced) against chi-square."""
    if full.dataset.n != reduced.dataset.n or not np.array_equal(
            full.dataset.z, reduced.dataset.z):
        raise MismatchedDataError("full and reduced fits use different data")
    if full.link.name != reduced.link.name:
        raise MismatchedDataError("full and reduced fits use different links")
    df = full.theta_hat.p - reduced.theta_hat.p
    if df < 0:
        raise NotNestedError("reduced model has more covariates than the full model")
    if df > 0:
        full_cols = {tuple(full.dataset.x[:, j]) for j in range(full.dataset.p)}
        for j in range(reduced.dataset.p):
            if tuple(reduced.dataset.x[:, j]) not in full_cols:
                raise NotNestedError("reduced covariates are not a subset of the full model")
    statistic = 2.0 * (full.loglik - reduced.loglik)
    if statistic < -1e-8:
        raise NotNestedError(
            f"reduced model has higher likelihood (statistic {statistic:.3g})")
    statistic = max(statistic, 0.0)
    if df == 0:
        return TestResult(statistic=statistic, df=0, p_value=1.0)
    return TestResult(statistic=statistic, df=df,
                      p_value=float(stats.chi2.sf(statistic, df)))


def score_test_binary(y, x):
    """Score-test numerator for one binary covariate plus the midrank oracle.

    y are uncensored outcomes, x is coded {0,1}.  Returns (S, WilcoxonStats);
    (n/2)*S equals the WilcoxonStats numerator exactly.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x)
    if y.shape != x.shape:
        raise MismatchedDataError("y and x lengths differ")
    vals = set(np.unique(x).tolist())
    if not vals <= {0, 1}:
        raise NonBinaryCovariateError(f"covariate values {sorted(vals)} are not {{0,1}}")

    n = y.shape[0]
    mask1 = x == 1
    n1 = int(np.sum(mask1))
    n0 = n - n1

    # pooled empirical CDF at each observation's value and the one below it
    order_vals, inv, counts = np.unique(y, return_inverse=True, return_counts=True)
    cum = np.cumsum(counts)
    P_at = cum[inv] / n
    P_below = (cum - counts)[inv] / n
    S = float(np.sum(P_at[mask1] + P_below[mask1] - 1.0))

    midranks = stats.rankdata(y, method="average")
    R1 = float(np.sum(midranks[mask1]))
    return S, WilcoxonStats(midranks=midranks, R1=R1, n0=n0, n1=n1)
