"""Shared fixtures and dataset builders for the test suite."""

import numpy as np
import pytest

from cpmdl import CensorCode, dataset_from_arrays

LINK_NAMES = ["logit", "probit", "loglog", "cloglog"]


def make_dataset(z, codes, x=None):
    """Build a dataset from plain lists; codes are 'o', 'l', 'u'."""
    z = np.asarray(z, dtype=float)
    lookup = {"o": CensorCode.OBSERVED, "l": CensorCode.BELOW_DL,
              "u": CensorCode.ABOVE_DL}
    delta = np.array([lookup[c] for c in codes], dtype=object)
    if x is None:
        x = np.zeros((len(z), 0))
    return dataset_from_arrays(z, delta, np.asarray(x, dtype=float))


def mixed_example(x=None):
    """Small worked example with both tails censored and interior cells.

    Uncensored values {4, 6, 7, 10}; below-DL records at 3 and 5;
    above-DL records at 9 and 12.  Categories: <3, 4, 6, 7, 10, >12.
    """
    z = [3.0, 4.0, 5.0, 6.0, 7.0, 9.0, 10.0, 12.0]
    codes = ["l", "o", "l", "o", "o", "u", "o", "u"]
    if x is None:
        x = [[0.0], [0.0], [1.0], [0.0], [1.0], [1.0], [0.0], [1.0]]
    return make_dataset(z, codes, x)


def random_censored_dataset(rng, n=40, p=1, lower_q=None, upper_q=None,
                            round_digits=1, beta=None):
    """Latent normal outcome with ties (rounding) and optional tail censoring.

    lower_q / upper_q are censoring quantiles of the latent outcome;
    None disables that tail.
    """
    if beta is None:
        beta = np.linspace(0.5, -0.5, p)
    x = rng.normal(size=(n, p))
    y = np.round(x @ beta + rng.normal(size=n), round_digits)
    z = y.copy()
    delta = np.full(n, CensorCode.OBSERVED, dtype=object)
    if lower_q is not None:
        dl = np.quantile(y, lower_q)
        m = y < dl
        z[m] = dl
        delta[m] = CensorCode.BELOW_DL
    if upper_q is not None:
        du = np.quantile(y, upper_q)
        m = y > du
        z[m] = du
        delta[m] = CensorCode.ABOVE_DL
    if not np.any(delta == CensorCode.OBSERVED):
        delta[np.argmin(np.abs(y - np.median(y)))] = CensorCode.OBSERVED
    return dataset_from_arrays(z, delta, x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
