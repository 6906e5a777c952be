"""Nonparametric log-likelihood, analytic gradient, and banded Hessian.

Every observation contributes log[F(alpha_R - eta) - F(alpha_L - eta)]
where (L, R) are the alpha indices assigned by the anchor set (NO_ALPHA
meaning cumulative 0 on the left or 1 on the right).  Because (L, R) is
always a single alpha or two adjacent alphas, the alpha-alpha block of
the Hessian is tridiagonal and is accumulated directly into banded
storage; no dense J x J matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import NO_ALPHA, AnchorSet, ValidatedDataset
from .errors import NonFiniteLikelihoodError, NonIncreasingAlphasError
from .links import LinkFunction

__all__ = ["ParameterVector", "BandedHessian", "log_likelihood", "gradient", "hessian"]

PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class ParameterVector:
    """theta = (alpha_0..alpha_K-1, beta_1..beta_p), alphas strictly increasing."""

    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "betas", np.asarray(self.betas, dtype=float))

    @property
    def n_alphas(self) -> int:
        return self.alphas.shape[0]

    @property
    def p(self) -> int:
        return self.betas.shape[0]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.alphas, self.betas])

    @staticmethod
    def from_flat(theta: np.ndarray, n_alphas: int) -> "ParameterVector":
        theta = np.asarray(theta, dtype=float)
        return ParameterVector(theta[:n_alphas], theta[n_alphas:])

    def alphas_increasing(self) -> bool:
        return bool(np.all(np.diff(self.alphas) > 0))


@dataclass
class BandedHessian:
    """Symmetric Hessian with tridiagonal alpha block.

    alpha_diag[k]    = d2 logL / d alpha_k^2
    alpha_offdiag[k] = d2 logL / d alpha_k d alpha_{k+1}
    alpha_beta[k, :] = d2 logL / d alpha_k d beta
    beta_block       = d2 logL / d beta d beta^T
    """

    alpha_diag: np.ndarray
    alpha_offdiag: np.ndarray
    alpha_beta: np.ndarray
    beta_block: np.ndarray

    @property
    def n_alphas(self) -> int:
        return self.alpha_diag.shape[0]

    @property
    def p(self) -> int:
        return self.beta_block.shape[0]

    def to_dense(self) -> np.ndarray:
        k, p = self.n_alphas, self.p
        H = np.zeros((k + p, k + p))
        H[:k, :k][np.diag_indices(k)] = self.alpha_diag
        idx = np.arange(k - 1)
        H[idx, idx + 1] = self.alpha_offdiag
        H[idx + 1, idx] = self.alpha_offdiag
        H[:k, k:] = self.alpha_beta
        H[k:, :k] = self.alpha_beta.T
        H[k:, k:] = self.beta_block
        return H


def _check_alphas(theta: ParameterVector, anchors: AnchorSet):
    if theta.n_alphas != anchors.n_alphas:
        raise ValueError(
            f"parameter vector has {theta.n_alphas} alphas, anchor set needs {anchors.n_alphas}"
        )
    if not theta.alphas_increasing():
        raise NonIncreasingAlphasError("alphas are not strictly increasing")


def _terms(theta, dataset, anchors, link):
    """Shared per-observation pieces for value/gradient/Hessian."""
    eta = dataset.x @ theta.betas if theta.p else np.zeros(dataset.n)
    L = anchors.left_alpha
    R = anchors.right_alpha
    has_l = L != NO_ALPHA
    has_r = R != NO_ALPHA
    uL = np.where(has_l, theta.alphas[np.where(has_l, L, 0)], 0.0) - eta
    uR = np.where(has_r, theta.alphas[np.where(has_r, R, 0)], 0.0) - eta
    return eta, L, R, has_l, has_r, uL, uR


def log_likelihood(theta: ParameterVector, dataset: ValidatedDataset,
                   anchors: AnchorSet, link: LinkFunction) -> float:
    _check_alphas(theta, anchors)
    _, L, R, has_l, has_r, uL, uR = _terms(theta, dataset, anchors, link)

    ll = np.empty(dataset.n)
    one_low = ~has_l & has_r      # log F(uR), exact log-CDF kernel
    one_up = has_l & ~has_r       # log (1 - F(uL)), exact log-survival kernel
    two = has_l & has_r
    if np.any(one_low):
        ll[one_low] = link.log_cdf(uR[one_low])
    if np.any(one_up):
        ll[one_up] = link.log_sf(uL[one_up])
    if np.any(two):
        P = link.cdf(uR[two]) - link.cdf(uL[two])
        ll[two] = np.log(np.maximum(P, PROB_FLOOR))
    neither = ~has_l & ~has_r     # single-category dataset: probability one
    if np.any(neither):
        ll[neither] = 0.0

    total = float(np.sum(ll))
    if not np.isfinite(total):
        raise NonFiniteLikelihoodError("log-likelihood is not finite")
    return total


def _ratios(theta, dataset, anchors, link):
    """Per-observation A_R = f(uR)/P, A_L = f(uL)/P and the f'/f ratios.

    One-sided terms use log-scale hazards so the ratios stay finite deep
    in the tails; two-sided cells use the floored probability.
    """
    _, L, R, has_l, has_r, uL, uR = _terms(theta, dataset, anchors, link)
    n = dataset.n
    A_R = np.zeros(n)
    A_L = np.zeros(n)

    one_low = ~has_l & has_r
    one_up = has_l & ~has_r
    two = has_l & has_r
    if np.any(one_low):
        A_R[one_low] = link.hazard_lower(uR[one_low])
    if np.any(one_up):
        A_L[one_up] = link.hazard_upper(uL[one_up])
    if np.any(two):
        P = np.maximum(link.cdf(uR[two]) - link.cdf(uL[two]), PROB_FLOOR)
        A_R[two] = link.pdf(uR[two]) / P
        A_L[two] = link.pdf(uL[two]) / P

    rR = np.where(has_r, link.dpdf_over_pdf(uR), 0.0)
    rL = np.where(has_l, link.dpdf_over_pdf(uL), 0.0)
    return L, R, has_l, has_r, A_L, A_R, rL, rR


def gradient(theta: ParameterVector, dataset: ValidatedDataset,
             anchors: AnchorSet, link: LinkFunction) -> np.ndarray:
    """Analytic gradient of log_likelihood in (alphas, betas) ordering."""
    _check_alphas(theta, anchors)
    L, R, has_l, has_r, A_L, A_R, _, _ = _ratios(theta, dataset, anchors, link)
    K = anchors.n_alphas

    g_alpha = (np.bincount(R[has_r], weights=A_R[has_r], minlength=K)
               - np.bincount(L[has_l], weights=A_L[has_l], minlength=K))
    D = A_R - A_L
    g_beta = -(dataset.x.T @ D) if theta.p else np.zeros(0)
    g = np.concatenate([g_alpha, g_beta])
    if not np.all(np.isfinite(g)):
        raise NonFiniteLikelihoodError("gradient is not finite")
    return g


def hessian(theta: ParameterVector, dataset: ValidatedDataset,
            anchors: AnchorSet, link: LinkFunction) -> BandedHessian:
    """Banded Hessian of log_likelihood; alpha block is tridiagonal."""
    _check_alphas(theta, anchors)
    L, R, has_l, has_r, A_L, A_R, rL, rR = _ratios(theta, dataset, anchors, link)
    K = anchors.n_alphas
    p = theta.p
    x = dataset.x

    B_R = A_R * rR  # f'(uR)/P
    B_L = A_L * rL
    D = A_R - A_L

    diag = (np.bincount(R[has_r], weights=(B_R - A_R * A_R)[has_r], minlength=K)
            + np.bincount(L[has_l], weights=(-B_L - A_L * A_L)[has_l], minlength=K))

    both = has_l & has_r
    offdiag = np.bincount(L[both], weights=(A_R * A_L)[both],
                          minlength=max(K - 1, 0))[:max(K - 1, 0)]

    alpha_beta = np.zeros((K, p))
    if p:
        wR = -(B_R - A_R * D)
        wL = B_L - A_L * D
        np.add.at(alpha_beta, R[has_r], wR[has_r, None] * x[has_r])
        np.add.at(alpha_beta, L[has_l], wL[has_l, None] * x[has_l])
        beta_block = x.T @ (((rR * A_R - rL * A_L) - D * D)[:, None] * x)
    else:
        beta_block = np.zeros((0, 0))

    H = BandedHessian(alpha_diag=diag, alpha_offdiag=offdiag,
                      alpha_beta=alpha_beta, beta_block=beta_block)
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(offdiag))
            and np.all(np.isfinite(alpha_beta)) and np.all(np.isfinite(beta_block))):
        raise NonFiniteLikelihoodError("Hessian is not finite")
    return H
