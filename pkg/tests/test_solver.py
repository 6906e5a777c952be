"""Newton solver: closed-form checks, a derivative-free optimizer oracle,
covariance via the banded factorization, and invariance properties."""

import numpy as np
import pytest
from scipy import optimize

from cpmdl import CensorCode, FitOptions, build_anchor_set, dataset_from_arrays, fit, get_link
from cpmdl.likelihood import ParameterVector, hessian, log_likelihood
from cpmdl.solver import initial_parameters

from conftest import LINK_NAMES, make_dataset, mixed_example, random_censored_dataset


@pytest.mark.parametrize("name", LINK_NAMES)
def test_intercept_only_closed_form(name, rng):
    """Without covariates the maximizer is G(empirical CDF) exactly, and
    the solver must recognize it at the starting point (zero iterations)."""
    y = np.round(rng.normal(size=300), 1)
    ds = dataset_from_arrays(y, np.full(300, CensorCode.OBSERVED, dtype=object),
                             np.zeros((300, 0)))
    model = fit(ds, link=name)
    assert model.converged
    assert model.n_iterations == 0

    values, counts = np.unique(y, return_counts=True)
    phat = np.cumsum(counts)[:-1] / 300
    want = get_link(name).inverse(phat)
    np.testing.assert_allclose(model.alphas, want, atol=1e-8)


def test_intercept_only_closed_form_with_censoring(rng):
    """The closed form also holds with censored tails: category
    proportions come from the term assignment."""
    ds = random_censored_dataset(rng, n=150, p=0, lower_q=0.2, upper_q=0.85)
    model = fit(ds, link="logit")
    anchors = model.anchors
    counts = np.bincount(anchors.init_category, minlength=anchors.n_categories)
    phat = np.cumsum(counts)[:-1] / ds.n
    np.testing.assert_allclose(model.alphas, get_link("logit").inverse(phat),
                               atol=1e-8)


@pytest.mark.parametrize("name", ["logit", "probit"])
def test_matches_derivative_free_optimizer(name, rng):
    """Oracle: maximize the same likelihood with Nelder-Mead on a
    reparameterization (increments of alphas in log space)."""
    ds = random_censored_dataset(rng, n=35, p=1, lower_q=0.2, upper_q=0.85,
                                 round_digits=0)
    anchors = build_anchor_set(ds)
    link = get_link(name)
    model = fit(ds, anchors=anchors, link=link)
    K = anchors.n_alphas

    def unpack(v):
        alphas = v[0] + np.concatenate([[0.0], np.cumsum(np.exp(v[1:K]))])
        return ParameterVector(alphas, v[K:])

    def neg_ll(v):
        return -log_likelihood(unpack(v), ds, anchors, link)

    a0 = model.alphas
    x0 = np.concatenate([[a0[0]], np.log(np.diff(a0)), model.beta])
    x0 = x0 + rng.normal(size=x0.shape[0]) * 0.05
    res = optimize.minimize(neg_ll, x0, method="Nelder-Mead",
                            options={"maxiter": 40000, "maxfev": 40000,
                                     "xatol": 1e-10, "fatol": 1e-12})
    oracle = unpack(res.x)
    assert model.loglik >= -res.fun - 1e-8
    assert model.beta[0] == pytest.approx(oracle.betas[0], abs=2e-4)
    np.testing.assert_allclose(model.alphas, oracle.alphas, atol=2e-3)


def test_vcov_is_inverse_information(rng):
    """The Schur-complement covariance must equal the dense inverse of
    the negated Hessian at the optimum."""
    ds = random_censored_dataset(rng, n=60, p=2, lower_q=0.2, upper_q=0.9)
    model = fit(ds, link="probit")
    H = hessian(model.theta_hat, ds, model.anchors, model.link).to_dense()
    dense = np.linalg.inv(-H)
    np.testing.assert_allclose(model.vcov, dense, rtol=1e-8, atol=1e-10)


def test_censored_value_invariance(rng):
    """Replacing censored z values by arbitrary same-tail stand-ins must
    leave every fitted quantity unchanged."""
    ds = random_censored_dataset(rng, n=80, p=1, lower_q=0.25, upper_q=0.8)
    base = fit(ds, link="probit")

    z2 = ds.z.copy()
    below = ds.delta == CensorCode.BELOW_DL
    above = ds.delta == CensorCode.ABOVE_DL
    lo_anchor = base.anchors.values[0]
    hi_anchor = base.anchors.values[-1]
    # scatter the recorded values anywhere strictly below/above the
    # nearest uncensored anchor
    z2[below] = lo_anchor - 1.0 - rng.uniform(0, 5, np.sum(below))
    z2[above] = hi_anchor + 1.0 + rng.uniform(0, 5, np.sum(above))
    ds2 = dataset_from_arrays(z2, ds.delta, ds.x)
    alt = fit(ds2, link="probit")

    assert alt.loglik == pytest.approx(base.loglik, abs=1e-10)
    np.testing.assert_allclose(alt.theta_hat.flat(), base.theta_hat.flat(),
                               atol=1e-10)
    np.testing.assert_allclose(alt.vcov, base.vcov, atol=1e-10)


def test_alphas_strictly_increasing_after_fit(rng):
    for seed in range(3):
        r = np.random.default_rng(seed)
        ds = random_censored_dataset(r, n=50, p=1, lower_q=0.3, upper_q=0.8)
        model = fit(ds, link="logit")
        assert model.theta_hat.alphas_increasing()
        assert model.gradient_norm <= 1e-8 or model.converged


def test_mixed_example_runs_all_links():
    ds = mixed_example()
    for name in LINK_NAMES:
        model = fit(ds, link=name)
        assert model.converged
        assert model.theta_hat.alphas_increasing()
        assert np.isfinite(model.loglik)


def test_options_validation():
    with pytest.raises(ValueError):
        FitOptions(max_iterations=0)
    with pytest.raises(ValueError):
        FitOptions(gradient_tol=0.0)


def test_initial_parameters_are_increasing(rng):
    ds = random_censored_dataset(rng, n=12, p=1, lower_q=0.4, upper_q=0.7)
    anchors = build_anchor_set(ds)
    theta = initial_parameters(ds, anchors, get_link("cloglog"))
    assert theta.alphas_increasing()
    assert np.all(theta.betas == 0.0)


def test_accepts_observation_list():
    from cpmdl import CensoredObservation
    obs = [CensoredObservation(z=1.0, x=[0.0]),
           CensoredObservation(z=2.0, x=[1.0]),
           CensoredObservation(z=0.5, delta=CensorCode.BELOW_DL, x=[0.5]),
           CensoredObservation(z=3.0, x=[1.5])]
    model = fit(obs, link="logit")
    assert model.converged
    assert model.dataset.n == 4
