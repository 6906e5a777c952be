"""Newton maximization of the nonparametric log-likelihood.

The Newton system is solved through a Schur complement on the beta
block: the negated tridiagonal alpha block is factored with a banded
Cholesky, alphas are eliminated, the small p x p reduced system gives
the beta step, and the alpha step is recovered by back-substitution.
The covariance matrix at the optimum reuses the same banded
factorization; the alpha block is never densely inverted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .data import AnchorSet, ValidatedDataset, build_anchor_set, validate_dataset
from .errors import (
    NonIncreasingAlphasUnrecoverableError,
    NotConvergedError,
    SingularInformationError,
)
from .likelihood import BandedHessian, ParameterVector, gradient, hessian, log_likelihood
from .links import LinkFunction, get_link

__all__ = ["FitOptions", "ModelFit", "fit"]


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 100
    gradient_tol: float = 1e-8       # sup-norm
    loglik_rel_tol: float = 1e-10
    max_step_halvings: int = 20

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if min(self.gradient_tol, self.loglik_rel_tol) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class ModelFit:
    """Fitted CPM: parameter estimates, covariance, and convergence metadata."""

    dataset: ValidatedDataset
    anchors: AnchorSet
    link: LinkFunction
    theta_hat: ParameterVector
    loglik: float
    vcov: np.ndarray                 # over (alphas, betas)
    n_iterations: int
    converged: bool
    gradient_norm: float = np.nan

    @property
    def beta(self) -> np.ndarray:
        return self.theta_hat.betas

    @property
    def alphas(self) -> np.ndarray:
        return self.theta_hat.alphas

    @property
    def n_params(self) -> int:
        return self.theta_hat.n_alphas + self.theta_hat.p


class _BandedFactor:
    """Cholesky factorization of the negated banded Hessian."""

    def __init__(self, H: BandedHessian):
        K, p = H.n_alphas, H.p
        ab = np.zeros((2, K))
        ab[0, 1:] = -H.alpha_offdiag
        ab[1, :] = -H.alpha_diag
        try:
            self.cb = cholesky_banded(ab, lower=False)
        except LinAlgError as e:
            raise SingularInformationError(
                f"negated alpha block is not positive definite: {e}"
            ) from e
        self.K = K
        self.p = p
        if p:
            U = -H.alpha_beta                      # K x p
            self.W = cho_solve_banded((self.cb, False), U)
            S = -H.beta_block - U.T @ self.W       # Schur complement, p x p
            try:
                self.S_chol = np.linalg.cholesky(S)
            except np.linalg.LinAlgError as e:
                raise SingularInformationError(
                    f"reduced beta system is singular (separation or collinearity?): {e}"
                ) from e
            self.U = U

    def _solve_S(self, b):
        y = np.linalg.solve(self.S_chol, b)
        return np.linalg.solve(self.S_chol.T, y)

    def solve(self, g: np.ndarray) -> np.ndarray:
        """Solve (-H) s = g, i.e. the Newton ascent direction for gradient g."""
        gA, gB = g[: self.K], g[self.K:]
        tA = cho_solve_banded((self.cb, False), gA)
        if not self.p:
            return tA
        sB = self._solve_S(gB - self.U.T @ tA)
        sA = tA - self.W @ sB
        return np.concatenate([sA, sB])

    def inverse(self) -> np.ndarray:
        """(-H)^{-1} via the banded factorization (blockwise Schur formula)."""
        Tinv = cho_solve_banded((self.cb, False), np.eye(self.K))
        if not self.p:
            return Tinv
        Sinv = self._solve_S(np.eye(self.p))
        V = np.empty((self.K + self.p, self.K + self.p))
        V[: self.K, : self.K] = Tinv + self.W @ Sinv @ self.W.T
        V[: self.K, self.K:] = -self.W @ Sinv
        V[self.K:, : self.K] = V[: self.K, self.K:].T
        V[self.K:, self.K:] = Sinv
        return V


def initial_parameters(dataset: ValidatedDataset, anchors: AnchorSet,
                       link: LinkFunction) -> ParameterVector:
    """G(empirical CDF) start with the 1/(2n) boundary clamp, beta = 0."""
    n = dataset.n
    counts = np.bincount(anchors.init_category, minlength=anchors.n_categories)
    cum = np.cumsum(counts)[: anchors.n_alphas] / n
    cum = np.clip(cum, 1.0 / (2 * n), 1.0 - 1.0 / (2 * n))
    alphas = np.asarray(link.inverse(cum), dtype=float)
    # ties from the clamp would violate strict ordering; nudge apart
    for k in range(1, alphas.shape[0]):
        if alphas[k] <= alphas[k - 1]:
            alphas[k] = alphas[k - 1] + 1e-6
    return ParameterVector(alphas, np.zeros(dataset.p))


def fit(dataset, anchors: AnchorSet | None = None, link: LinkFunction | str = "logit",
        options: FitOptions | None = None) -> ModelFit:
    """Maximize the nonparametric likelihood; returns the converged fit.

    Raises NotConvergedError (with diagnostics attached) if the iteration
    budget is exhausted, SingularInformationError on a degenerate Newton
    system, and NonIncreasingAlphasUnrecoverableError when step-halving
    cannot restore the alpha ordering.
    """
    dataset = validate_dataset(dataset)
    if anchors is None:
        anchors = build_anchor_set(dataset)
    if isinstance(link, str):
        link = get_link(link)
    options = options or FitOptions()

    theta = initial_parameters(dataset, anchors, link)
    ll = log_likelihood(theta, dataset, anchors, link)
    converged = False
    n_iter = 0
    g = gradient(theta, dataset, anchors, link)
    factor = None

    for n_iter in range(1, options.max_iterations + 1):
        if np.max(np.abs(g)) <= options.gradient_tol:
            converged = True
            n_iter -= 1
            break
        H = hessian(theta, dataset, anchors, link)
        factor = _BandedFactor(H)
        step = factor.solve(g)

        accepted = False
        ordering_ok_somewhere = False
        t = 1.0
        for _ in range(options.max_step_halvings + 1):
            cand = ParameterVector.from_flat(theta.flat() + t * step, theta.n_alphas)
            if cand.alphas_increasing():
                ordering_ok_somewhere = True
                ll_new = log_likelihood(cand, dataset, anchors, link)
                if ll_new >= ll:
                    accepted = True
                    break
            t /= 2.0
        if not accepted:
            if not ordering_ok_somewhere:
                raise NonIncreasingAlphasUnrecoverableError(
                    "step-halving exhausted without restoring alpha ordering"
                )
            # no uphill step left: numerically at the optimum
            converged = np.max(np.abs(g)) <= max(options.gradient_tol, 1e-6)
            break

        rel_change = abs(ll_new - ll) / (abs(ll) + 1.0)
        theta, ll = cand, ll_new
        g = gradient(theta, dataset, anchors, link)
        if t == 1.0 and rel_change <= options.loglik_rel_tol:
            converged = True
            break

    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    if not converged and gnorm > options.gradient_tol:
        raise NotConvergedError(
            f"Newton did not converge in {options.max_iterations} iterations",
            diagnostics={"gradient_norm": gnorm, "loglik": ll,
                         "n_iterations": n_iter, "theta": theta},
        )

    H = hessian(theta, dataset, anchors, link)
    vcov = _BandedFactor(H).inverse()
    return ModelFit(dataset=dataset, anchors=anchors, link=link, theta_hat=theta,
                    loglik=ll, vcov=vcov, n_iterations=n_iter, converged=True,
                    gradient_norm=gnorm)
