#!/usr/bin/env python3
"""Independent hand computation of the interpolated-quantile example.

Uses nothing from the library's quantile code: the cumulative curve is
written out by hand, the two interpolants and the weighted combination
are computed with plain arithmetic, and the result is compared against
``cpmdl.conditional_quantile`` on a model constructed to have exactly
that fitted curve.

Configuration: detection limits 0.5 (lower) and 2 (upper), interior
values {0.7, 0.86, 1, 1.5, 1.8}, cumulative probabilities
(0.1, 0.3, 0.45, 0.6, 0.8, 0.9) at the six category boundaries.
"""

import sys

import numpy as np

from cpmdl import conditional_quantile, get_link
from cpmdl.data import build_anchor_set, CensorCode, dataset_from_arrays
from cpmdl.likelihood import ParameterVector
from cpmdl.solver import ModelFit

# category numeric stand-ins: lower DL, interior values, upper DL
VALUES = [0.5, 0.7, 0.86, 1.0, 1.5, 1.8, 2.0]
# cumulative probability at each category boundary (last category fills to 1)
CUM = [0.1, 0.3, 0.45, 0.6, 0.8, 0.9, 1.0]
P = 0.5


def hand_quantile(p):
    """Plain-arithmetic weighted interpolation between the two interpolants."""
    if p <= CUM[0]:
        return "<0.5"
    if p >= CUM[-2]:
        return ">2"
    # m: first index with CUM[m] >= p
    m = next(i for i, c in enumerate(CUM) if c >= p)
    frac = (p - CUM[m - 1]) / (CUM[m] - CUM[m - 1])
    q1 = VALUES[m - 1] + frac * (VALUES[m] - VALUES[m - 1])
    q2 = VALUES[m] + frac * (VALUES[m + 1] - VALUES[m])
    w = (p - CUM[0]) / (CUM[-2] - CUM[0])
    return (1 - w) * q1 + w * q2


def library_quantile(p):
    """The same curve pushed through the library's fitted-model pathway."""
    z = VALUES
    codes = ([CensorCode.BELOW_DL] + [CensorCode.OBSERVED] * 5
             + [CensorCode.ABOVE_DL])
    ds = dataset_from_arrays(np.array(z), np.array(codes, dtype=object),
                             np.zeros((7, 0)))
    anchors = build_anchor_set(ds)
    link = get_link("logit")
    alphas = np.asarray(link.inverse(np.array(CUM[:-1])), dtype=float)
    K = alphas.shape[0]
    model = ModelFit(dataset=ds, anchors=anchors, link=link,
                     theta_hat=ParameterVector(alphas, np.zeros(0)),
                     loglik=0.0, vcov=np.zeros((K, K)), n_iterations=0,
                     converged=True)
    q = conditional_quantile(model, [], p)
    return q.value if q.is_numeric else q.label


def main():
    hand = hand_quantile(P)
    lib = library_quantile(P)
    print(f"hand-computed  Q({P}) = {hand!r}")
    print(f"library        Q({P}) = {lib!r}")
    ok = abs(hand - lib) < 1e-12 and abs(hand - 1.0366666666666666) < 1e-12
    # boundary behavior
    for p, want in [(0.05, "<0.5"), (0.1, "<0.5"), (0.9, ">2"), (0.95, ">2")]:
        h, l = hand_quantile(p), library_quantile(p)
        print(f"p={p}: hand {h!r}, library {l!r}")
        ok = ok and h == l == want
    print("AGREEMENT" if ok else "MISMATCH")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
