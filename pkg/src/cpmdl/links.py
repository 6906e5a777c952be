"""Link functions for cumulative probability models.

Each link bundles the error CDF ``F``, its density ``f``, the density
derivative ``f'``, and the inverse link ``G = F^{-1}``, plus log-scale
kernels (log F and log(1-F)) used to keep deep-tail likelihood terms
finite under heavy censoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

__all__ = ["LinkFunction", "get_link", "LINKS"]

# exp() overflows past ~709; clip arguments for the double-exponential links
_EXP_CLIP = 700.0
_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class LinkFunction:
    """A link G with error distribution F = G^{-1}.

    ``dpdf_over_pdf`` is f'(x)/f(x); multiplying it by a stable density
    ratio gives f'(x)/P without ever forming underflowing quotients.
    """

    name: str
    cdf: Callable[[np.ndarray], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray]
    pdf_deriv: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    log_cdf: Callable[[np.ndarray], np.ndarray]
    log_sf: Callable[[np.ndarray], np.ndarray]
    log_pdf: Callable[[np.ndarray], np.ndarray]
    dpdf_over_pdf: Callable[[np.ndarray], np.ndarray]

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def hazard_lower(self, x):
        """f(x)/F(x), stable in the lower tail."""
        return np.exp(self.log_pdf(x) - self.log_cdf(x))

    def hazard_upper(self, x):
        """f(x)/(1-F(x)), stable in the upper tail."""
        return np.exp(self.log_pdf(x) - self.log_sf(x))


def _logit() -> LinkFunction:
    def pdf(x):
        p = special.expit(x)
        return p * (1.0 - p)

    return LinkFunction(
        name="logit",
        cdf=special.expit,
        pdf=pdf,
        pdf_deriv=lambda x: pdf(x) * (1.0 - 2.0 * special.expit(x)),
        inverse=special.logit,
        log_cdf=special.log_expit,
        log_sf=lambda x: special.log_expit(-np.asarray(x, dtype=float)),
        log_pdf=lambda x: special.log_expit(x) + special.log_expit(-np.asarray(x, dtype=float)),
        dpdf_over_pdf=lambda x: 1.0 - 2.0 * special.expit(x),
    )


def _probit() -> LinkFunction:
    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        return -0.5 * x * x - np.log(_SQRT_2PI)

    return LinkFunction(
        name="probit",
        cdf=special.ndtr,
        pdf=lambda x: np.exp(log_pdf(x)),
        pdf_deriv=lambda x: -np.asarray(x, dtype=float) * np.exp(log_pdf(x)),
        inverse=special.ndtri,
        log_cdf=special.log_ndtr,
        log_sf=lambda x: special.log_ndtr(-np.asarray(x, dtype=float)),
        log_pdf=log_pdf,
        dpdf_over_pdf=lambda x: -np.asarray(x, dtype=float),
    )


def _loglog() -> LinkFunction:
    # F(x) = exp(-exp(-x)); G(p) = -log(-log p)
    def _t(x):
        return np.exp(-np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP))

    def log_sf(x):
        return np.log(-np.expm1(-_t(x)))

    return LinkFunction(
        name="loglog",
        cdf=lambda x: np.exp(-_t(x)),
        pdf=lambda x: np.exp(-np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP) - _t(x)),
        pdf_deriv=lambda x: np.exp(
            -np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP) - _t(x)
        ) * (_t(x) - 1.0),
        inverse=lambda p: -np.log(-np.log(p)),
        log_cdf=lambda x: -_t(x),
        log_sf=log_sf,
        log_pdf=lambda x: -np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP) - _t(x),
        dpdf_over_pdf=lambda x: _t(x) - 1.0,
    )


def _cloglog() -> LinkFunction:
    # F(x) = 1 - exp(-exp(x)); G(p) = log(-log(1-p))
    def _t(x):
        return np.exp(np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP))

    def log_cdf(x):
        return np.log(-np.expm1(-_t(x)))

    return LinkFunction(
        name="cloglog",
        cdf=lambda x: -np.expm1(-_t(x)),
        pdf=lambda x: np.exp(np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP) - _t(x)),
        pdf_deriv=lambda x: np.exp(
            np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP) - _t(x)
        ) * (1.0 - _t(x)),
        inverse=lambda p: np.log(-np.log1p(-np.asarray(p, dtype=float))),
        log_cdf=log_cdf,
        log_sf=lambda x: -_t(x),
        log_pdf=lambda x: np.clip(np.asarray(x, dtype=float), -_EXP_CLIP, _EXP_CLIP) - _t(x),
        dpdf_over_pdf=lambda x: 1.0 - _t(x),
    )


LINKS = {
    "logit": _logit(),
    "probit": _probit(),
    "loglog": _loglog(),
    "cloglog": _cloglog(),
}


def get_link(name: str) -> LinkFunction:
    try:
        return LINKS[name]
    except KeyError:
        raise ValueError(
            f"unknown link {name!r}; choose from {sorted(LINKS)}"
        ) from None
