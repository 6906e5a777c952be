"""Conditional CDFs, interpolated conditional quantiles, and the
probabilistic index, all read off a fitted model.

Quantiles use the weighted interpolation between the left-interpolant
Q1 and right-interpolant Q2, with the tail categories mapped to the
detection limits l and u for interpolation and returned as boundary
categories ("<l" / ">u") outside [P0, PJ].
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .errors import InvalidProbabilityError, NotConvergedError, UnsupportedLinkError
from .solver import ModelFit

__all__ = ["ConditionalCDF", "QuantileValue", "conditional_cdf", "cdf_curve",
           "conditional_quantile", "conditional_quantile_interval",
           "probabilistic_index"]


@functools.total_ordering
@dataclass(frozen=True)
class QuantileValue:
    """A numeric quantile or a boundary category below/above the DLs."""

    kind: str                      # "numeric" | "below_lowest" | "above_highest"
    value: Optional[float] = None
    label: str = ""

    @staticmethod
    def numeric(v: float) -> "QuantileValue":
        return QuantileValue(kind="numeric", value=float(v))

    @staticmethod
    def below_lowest(label: str) -> "QuantileValue":
        return QuantileValue(kind="below_lowest", label=label)

    @staticmethod
    def above_highest(label: str) -> "QuantileValue":
        return QuantileValue(kind="above_highest", label=label)

    @property
    def is_numeric(self) -> bool:
        return self.kind == "numeric"

    def _sort_key(self):
        if self.kind == "below_lowest":
            return (0, 0.0)
        if self.kind == "numeric":
            return (1, self.value)
        return (2, 0.0)

    def __lt__(self, other):
        return self._sort_key() < other._sort_key()

    def __str__(self):
        return self.label if not self.is_numeric else repr(self.value)


@dataclass(frozen=True)
class ConditionalCDF:
    """F-hat at every category boundary for a fixed covariate profile."""

    x: np.ndarray
    eval_points: np.ndarray        # numeric stand-ins per category (l, a_1..a_J, u)
    P: np.ndarray                  # cumulative probability per category, last = 1
    se: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray


def _require_converged(fit: ModelFit):
    if not fit.converged:
        raise NotConvergedError("derived quantities require a converged fit")


def _link_scale(fit: ModelFit, x):
    """Per-alpha linear predictor alpha_m - beta'x and its delta-method SD."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    K = fit.theta_hat.n_alphas
    eta = float(x @ fit.beta) if fit.theta_hat.p else 0.0
    ell = fit.alphas - eta
    Vaa = np.diag(fit.vcov)[:K]
    if fit.theta_hat.p:
        Vab = fit.vcov[:K, K:]
        Vbb = fit.vcov[K:, K:]
        var = Vaa - 2.0 * (Vab @ x) + float(x @ Vbb @ x)
    else:
        var = Vaa.copy()
    return x, ell, np.sqrt(np.maximum(var, 0.0))


def cdf_curve(fit: ModelFit, x, level: float = 0.95) -> ConditionalCDF:
    """CDF estimate with delta-method SEs and link-scale Wald bands.

    Bands are computed on the link scale, mapped through the error CDF
    (so they stay within [0, 1]), and made monotone with a running max.
    """
    _require_converged(fit)
    x, ell, sd = _link_scale(fit, x)
    z = stats.norm.ppf(0.5 * (1 + level))
    F = fit.link.cdf
    P = np.append(F(ell), 1.0)
    se = np.append(np.abs(fit.link.pdf(ell)) * sd, 0.0)
    lo = np.append(F(ell - z * sd), 1.0)
    hi = np.append(F(ell + z * sd), 1.0)
    lo = np.maximum.accumulate(lo)
    hi = np.maximum.accumulate(hi)
    return ConditionalCDF(x=x, eval_points=fit.anchors.category_plot_values(),
                          P=P, se=se, ci_lo=lo, ci_hi=hi)


def conditional_cdf(fit: ModelFit, x, y: float):
    """Step-function CDF at y: (estimate, se); 0 below all anchors."""
    _require_converged(fit)
    x, ell, sd = _link_scale(fit, x)
    vals = fit.anchors.category_plot_values()
    m = int(np.searchsorted(vals, y, side="right")) - 1
    if m < 0:
        return 0.0, 0.0
    if m >= fit.theta_hat.n_alphas:
        return 1.0, 0.0
    est = float(fit.link.cdf(ell[m]))
    se = float(np.abs(fit.link.pdf(ell[m])) * sd[m])
    return est, se


def _quantile_from_curve(curve: np.ndarray, fit: ModelFit, p: float) -> QuantileValue:
    """Weighted Q1/Q2 interpolation applied to one cumulative curve."""
    anchors = fit.anchors
    M = anchors.n_categories
    vals = anchors.category_plot_values()
    C = curve  # length M, C[-1] == 1

    wlow = C[0] if anchors.has_lower_cat else 0.0
    whigh = C[M - 2] if anchors.has_upper_cat else 1.0
    if anchors.has_lower_cat and p <= wlow:
        return QuantileValue.below_lowest(anchors.lower_label)
    if anchors.has_upper_cat and p >= whigh:
        return QuantileValue.above_highest(anchors.upper_label)

    m = int(np.searchsorted(C, p, side="left"))  # C[m-1] < p <= C[m]
    if m == 0:
        q1 = vals[0]
    else:
        frac = (p - C[m - 1]) / (C[m] - C[m - 1])
        q1 = vals[m - 1] + frac * (vals[m] - vals[m - 1])
    if m >= M - 1:
        q2 = vals[M - 1]
    else:
        frac = (p - C[m - 1] if m > 0 else p) / (C[m] - (C[m - 1] if m > 0 else 0.0))
        q2 = vals[m] + frac * (vals[m + 1] - vals[m])

    if whigh > wlow:
        w = min(max((p - wlow) / (whigh - wlow), 0.0), 1.0)
    else:
        w = 0.5  # degenerate all-mass-at-tails fit
    return QuantileValue.numeric((1.0 - w) * q1 + w * q2)


def _check_p(p: float):
    if not 0.0 < p < 1.0:
        raise InvalidProbabilityError(f"quantile probability {p} is not in (0, 1)")


def conditional_quantile(fit: ModelFit, x, p: float) -> QuantileValue:
    _check_p(p)
    _require_converged(fit)
    curve = cdf_curve(fit, x)
    return _quantile_from_curve(curve.P, fit, p)


def conditional_quantile_interval(fit: ModelFit, x, p: float, level: float = 0.95):
    """(lo, hi) from interpolating the CDF's upper and lower CI curves."""
    _check_p(p)
    _require_converged(fit)
    curve = cdf_curve(fit, x, level=level)
    lo = _quantile_from_curve(curve.ci_hi, fit, p)
    hi = _quantile_from_curve(curve.ci_lo, fit, p)
    return lo, hi


def probabilistic_index(fit: ModelFit, x1, x2) -> float:
    """P(Y1 < Y2 | X1=x1, X2=x2), closed form under the logit link."""
    if fit.link.name != "logit":
        raise UnsupportedLinkError(
            f"probabilistic index has a closed form only for logit, not {fit.link.name}")
    d = np.asarray(x2, dtype=float) - np.asarray(x1, dtype=float)
    return float(1.0 / (1.0 + np.exp(-float(d @ fit.beta))))
