"""Reference estimators for the comparison studies: substitution-based
linear regression on the log scale and the fully parametric
censored-lognormal MLE."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .data import CensorCode, ValidatedDataset, validate_dataset
from .errors import (
    MultipleDLsUnsupportedError,
    NonPositiveOutcomeError,
    NotConvergedError,
)

__all__ = ["ImputationRule", "ParametricFit", "substitute_and_fit",
           "censored_lognormal_mle"]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class ImputationRule(enum.Enum):
    DL = "dl"
    HALF_DL = "dl/2"
    DL_OVER_SQRT2 = "dl/sqrt2"

    def impute(self, dl: float) -> float:
        if self is ImputationRule.DL:
            return dl
        if self is ImputationRule.HALF_DL:
            return dl / 2.0
        return dl / np.sqrt(2.0)


@dataclass
class ParametricFit:
    """Normal linear model on the transformed scale."""

    intercept: float
    beta: np.ndarray
    sigma: float
    vcov: np.ndarray           # over (intercept, beta); sigma excluded
    loglik: float

    def linear_predictor(self, x) -> float:
        return self.intercept + float(np.atleast_1d(np.asarray(x, float)) @ self.beta)

    def conditional_median(self, x) -> float:
        """Plug-in lognormal median exp(eta)."""
        return float(np.exp(self.linear_predictor(x)))

    def median_interval(self, x, level: float = 0.95):
        from scipy import stats
        x1 = np.concatenate([[1.0], np.atleast_1d(np.asarray(x, float))])
        se = float(np.sqrt(max(x1 @ self.vcov @ x1, 0.0)))
        z = stats.norm.ppf(0.5 * (1 + level))
        eta = self.linear_predictor(x)
        return float(np.exp(eta - z * se)), float(np.exp(eta + z * se))


def _design(dataset: ValidatedDataset):
    return np.column_stack([np.ones(dataset.n), dataset.x])


def substitute_and_fit(dataset, rule: ImputationRule,
                       transform=np.log) -> ParametricFit:
    """Replace lower-DL censored outcomes by the rule's constant, then OLS.

    Only a single lower DL is supported; the transform defaults to log.
    """
    dataset = validate_dataset(dataset)
    if np.any(dataset.delta == CensorCode.ABOVE_DL):
        raise MultipleDLsUnsupportedError("substitution handles a single lower DL only")
    below = dataset.delta == CensorCode.BELOW_DL
    dls = np.unique(dataset.z[below])
    if dls.size > 1:
        raise MultipleDLsUnsupportedError(f"multiple lower DLs found: {dls}")

    y = dataset.z.copy()
    if dls.size == 1:
        y[below] = rule.impute(float(dls[0]))
    if np.any(y <= 0):
        raise NonPositiveOutcomeError("log transform needs positive outcomes")
    ty = transform(y)

    X = _design(dataset)
    n, q = X.shape
    coef, _, rank, _ = np.linalg.lstsq(X, ty, rcond=None)
    resid = ty - X @ coef
    rss = float(resid @ resid)
    dof = n - q
    s2 = rss / dof if dof > 0 else np.nan
    vcov = s2 * np.linalg.inv(X.T @ X)
    sigma = float(np.sqrt(rss / n))
    loglik = float(-0.5 * n * (np.log(2 * np.pi * sigma ** 2) + 1.0))
    return ParametricFit(intercept=float(coef[0]), beta=coef[1:],
                         sigma=sigma, vcov=vcov, loglik=loglik)


def _censored_lognormal_negll(params, logz, X, obs, below, above):
    q = X.shape[1]
    coef = params[:q]
    log_sigma = params[q]
    sigma = np.exp(log_sigma)
    r = (logz - X @ coef) / sigma

    ll = 0.0
    grad_coef = np.zeros(q)
    grad_ls = 0.0
    if np.any(obs):
        ro = r[obs]
        ll += float(np.sum(-0.5 * ro * ro - _LOG_SQRT_2PI - log_sigma))
        w = ro / sigma
        grad_coef += X[obs].T @ w
        grad_ls += float(np.sum(ro * ro - 1.0))
    if np.any(below):
        rb = r[below]
        ll += float(np.sum(special.log_ndtr(rb)))
        ratio = np.exp(-0.5 * rb * rb - _LOG_SQRT_2PI - special.log_ndtr(rb))
        grad_coef += X[below].T @ (-ratio / sigma)
        grad_ls += float(np.sum(-ratio * rb))
    if np.any(above):
        ra = r[above]
        ll += float(np.sum(special.log_ndtr(-ra)))
        ratio = np.exp(-0.5 * ra * ra - _LOG_SQRT_2PI - special.log_ndtr(-ra))
        grad_coef += X[above].T @ (ratio / sigma)
        grad_ls += float(np.sum(ratio * ra))
    return -ll, -np.concatenate([grad_coef, [grad_ls]])


def censored_lognormal_mle(dataset) -> ParametricFit:
    """Maximum likelihood for log z ~ N(X coef, sigma^2) with tail censoring.

    Censoring bounds are taken per observation (multiple-DL capable);
    the optimizer works in log sigma, and the covariance comes from the
    inverse observed information.
    """
    dataset = validate_dataset(dataset)
    obs = dataset.delta == CensorCode.OBSERVED
    below = dataset.delta == CensorCode.BELOW_DL
    above = dataset.delta == CensorCode.ABOVE_DL
    if np.any(dataset.z <= 0):
        raise NonPositiveOutcomeError("lognormal model needs positive outcomes and DLs")
    logz = np.log(dataset.z)
    X = _design(dataset)
    q = X.shape[1]

    # OLS on observed records as the starting point
    coef0, _, _, _ = np.linalg.lstsq(X[obs], logz[obs], rcond=None)
    resid = logz[obs] - X[obs] @ coef0
    s0 = float(np.sqrt(np.mean(resid ** 2))) or 1.0
    x0 = np.concatenate([coef0, [np.log(s0)]])

    res = optimize.minimize(
        _censored_lognormal_negll, x0, args=(logz, X, obs, below, above),
        jac=True, method="BFGS", options={"gtol": 1e-9, "maxiter": 500})
    if not res.success and np.max(np.abs(res.jac)) > 1e-4:
        raise NotConvergedError(f"censored lognormal MLE failed: {res.message}")

    # observed information by central differences of the analytic gradient
    h = 1e-5
    dim = q + 1
    info = np.zeros((dim, dim))
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = h
        _, gp = _censored_lognormal_negll(res.x + e, logz, X, obs, below, above)
        _, gm = _censored_lognormal_negll(res.x - e, logz, X, obs, below, above)
        info[:, j] = (gp - gm) / (2 * h)
    info = 0.5 * (info + info.T)
    vcov_full = np.linalg.inv(info)

    return ParametricFit(intercept=float(res.x[0]), beta=res.x[1:q],
                         sigma=float(np.exp(res.x[q])),
                         vcov=vcov_full[:q, :q], loglik=float(-res.fun))
