"""Dataset validation and anchor-point category construction.

The ordered category scaffold places every observation into exactly one
likelihood term.  Categories are indexed 0..M-1 from lowest to highest,
where M = J + [lower tail category] + [upper tail category] and J is the
number of distinct uncensored outcome values.  Cumulative probabilities
are parameterized by M-1 alpha parameters: alpha index m corresponds to
Pr(Y <= category m | x) for m = 0..M-2.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyDataError,
    InconsistentDimensionsError,
    InternalAssignmentError,
    NoUncensoredValuesError,
    NonFiniteValueError,
)

__all__ = [
    "CensorCode",
    "CensoredObservation",
    "ValidatedDataset",
    "TermKind",
    "AnchorSet",
    "validate_dataset",
    "build_anchor_set",
]

NO_ALPHA = -1  # sentinel for "no alpha on this side" (cumulative prob 0 or 1)


class CensorCode(enum.Enum):
    OBSERVED = "observed"
    BELOW_DL = "below_dl"
    ABOVE_DL = "above_dl"


@dataclass(frozen=True)
class CensoredObservation:
    """One record (z, delta, x): outcome or DL value, censor code, covariates."""

    z: float
    delta: CensorCode = CensorCode.OBSERVED
    x: Sequence[float] = ()


@dataclass(frozen=True)
class ValidatedDataset:
    """Immutable dataset with consistent covariate dimension."""

    z: np.ndarray        # (n,)
    delta: np.ndarray    # (n,) of CensorCode
    x: np.ndarray        # (n, p)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def observed_mask(self) -> np.ndarray:
        return self.delta == CensorCode.OBSERVED

    def replace_x(self, x: np.ndarray) -> "ValidatedDataset":
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != self.n:
            raise InconsistentDimensionsError("covariate rows do not match outcome length")
        return ValidatedDataset(self.z, self.delta, x)


class TermKind(enum.Enum):
    LOWEST_CELL = "lowest_cell"
    INTERIOR_CELL = "interior_cell"
    HIGHEST_CELL = "highest_cell"
    LOWER_TAIL = "lower_tail"
    UPPER_TAIL = "upper_tail"


def _fmt_value(v: float) -> str:
    if float(v) == int(v):
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True)
class AnchorSet:
    """Ordered categories supporting the nonparametric likelihood.

    ``left_alpha``/``right_alpha`` give, per observation, the alpha
    indices bounding its likelihood term: Pr = F(alpha[right] - eta) -
    F(alpha[left] - eta), with NO_ALPHA standing for cumulative 0 (left)
    or 1 (right).  Every pair is a single alpha or two adjacent alphas,
    which is what makes the alpha block of the Hessian tridiagonal.
    """

    values: np.ndarray               # strictly increasing uncensored values a_1..a_J
    has_lower_cat: bool
    has_upper_cat: bool
    lower_dl: Optional[float]        # l, smallest below-DL z (None if no such data)
    upper_dl: Optional[float]        # u, largest above-DL z
    lower_label: str
    upper_label: str
    term_kind: np.ndarray            # (n,) of TermKind
    left_alpha: np.ndarray           # (n,) int
    right_alpha: np.ndarray          # (n,) int
    init_category: np.ndarray        # (n,) int, category used for the ECDF start

    @property
    def n_values(self) -> int:
        return self.values.shape[0]

    @property
    def n_categories(self) -> int:
        return self.n_values + int(self.has_lower_cat) + int(self.has_upper_cat)

    @property
    def n_alphas(self) -> int:
        return self.n_categories - 1

    def category_labels(self) -> list[str]:
        labels = [_fmt_value(v) for v in self.values]
        if self.has_lower_cat:
            labels.insert(0, self.lower_label)
        if self.has_upper_cat:
            labels.append(self.upper_label)
        return labels

    def category_plot_values(self) -> np.ndarray:
        """Numeric stand-ins per category: the DLs l and u for the tail cells."""
        vals = list(self.values)
        if self.has_lower_cat:
            vals.insert(0, self.lower_dl)
        if self.has_upper_cat:
            vals.append(self.upper_dl)
        return np.asarray(vals, dtype=float)


def validate_dataset(observations) -> ValidatedDataset:
    """Check and pack a list of CensoredObservation (or (z, delta, x) arrays)."""
    if isinstance(observations, ValidatedDataset):
        return observations
    obs = list(observations)
    if not obs:
        raise EmptyDataError("no observations")
    z = np.array([o.z for o in obs], dtype=float)
    delta = np.array([o.delta for o in obs], dtype=object)
    lengths = {len(o.x) for o in obs}
    if len(lengths) != 1:
        raise InconsistentDimensionsError(f"covariate lengths differ: {sorted(lengths)}")
    p = lengths.pop()
    x = np.array([list(o.x) for o in obs], dtype=float).reshape(len(obs), p)
    return _validate_arrays(z, delta, x)


def dataset_from_arrays(z, delta, x) -> ValidatedDataset:
    """Array-based constructor used by the simulation harness and CSV reader."""
    z = np.asarray(z, dtype=float)
    delta = np.asarray(delta, dtype=object)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if z.size == 0:
        raise EmptyDataError("no observations")
    if x.shape[0] != z.shape[0] or delta.shape[0] != z.shape[0]:
        raise InconsistentDimensionsError("z, delta, x lengths differ")
    return _validate_arrays(z, delta, x)


def _validate_arrays(z, delta, x) -> ValidatedDataset:
    if not np.all(np.isfinite(z)):
        raise NonFiniteValueError("non-finite outcome value")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValueError("non-finite covariate value")
    if not np.any(delta == CensorCode.OBSERVED):
        raise NoUncensoredValuesError("dataset has no uncensored observations")
    return ValidatedDataset(z=z, delta=delta, x=x)


def build_anchor_set(dataset: ValidatedDataset) -> AnchorSet:
    """Construct categories and per-observation likelihood-term assignment."""
    z = dataset.z
    delta = dataset.delta
    obs_mask = delta == CensorCode.OBSERVED
    below_mask = delta == CensorCode.BELOW_DL
    above_mask = delta == CensorCode.ABOVE_DL

    values = np.unique(z[obs_mask])
    J = values.shape[0]

    lower_dl = float(np.min(z[below_mask])) if np.any(below_mask) else None
    upper_dl = float(np.max(z[above_mask])) if np.any(above_mask) else None
    has_lower = bool(lower_dl is not None and lower_dl <= values[0])
    has_upper = bool(upper_dl is not None and upper_dl >= values[-1])

    M = J + int(has_lower) + int(has_upper)
    n_alphas = M - 1
    off = int(has_lower)  # category index of a_1

    n = dataset.n
    term_kind = np.empty(n, dtype=object)
    left = np.full(n, NO_ALPHA, dtype=np.int64)
    right = np.full(n, NO_ALPHA, dtype=np.int64)
    init_cat = np.zeros(n, dtype=np.int64)

    # value -> 1-based anchor index j
    j_of = np.searchsorted(values, z[obs_mask]) + 1

    # uncensored: cell between alpha_{c-1} and alpha_c at category c
    obs_idx = np.nonzero(obs_mask)[0]
    cats = j_of - 1 + off
    for i, c in zip(obs_idx, cats):
        l = c - 1 if c > 0 else NO_ALPHA
        r = c if c < M - 1 else NO_ALPHA
        left[i] = l
        right[i] = r
        init_cat[i] = c
        if l == NO_ALPHA:
            term_kind[i] = TermKind.LOWEST_CELL
        elif r == NO_ALPHA:
            term_kind[i] = TermKind.HIGHEST_CELL
        else:
            term_kind[i] = TermKind.INTERIOR_CELL

    for i in np.nonzero(below_mask)[0]:
        zi = z[i]
        term_kind[i] = TermKind.LOWER_TAIL
        if has_lower and zi == lower_dl:
            right[i] = 0
        else:
            k = int(np.searchsorted(values, zi, side="left"))  # values[k-1] < zi
            if k == 0:
                if has_lower:
                    right[i] = 0  # below-DL between l and a_1: same cell as a_0
                else:
                    raise InternalAssignmentError(
                        f"below-DL value {zi} has no anchor below it and no lower category"
                    )
            else:
                idx = (k - 1) + off  # alpha index of a_k
                if idx > n_alphas - 1:
                    # the event "Y below z" covers every category: the
                    # record is uninformative and its term has probability 1
                    warnings.warn(
                        f"below-DL value {zi} exceeds the largest uncensored value; "
                        "the record is uninformative", stacklevel=2)
                    idx = NO_ALPHA
                right[i] = idx
        init_cat[i] = right[i] if right[i] != NO_ALPHA else M - 1

    for i in np.nonzero(above_mask)[0]:
        zi = z[i]
        term_kind[i] = TermKind.UPPER_TAIL
        if has_upper and zi == upper_dl:
            left[i] = M - 2
        else:
            k = int(np.searchsorted(values, zi, side="right"))  # values[k] > zi
            if k == J:
                if has_upper:
                    left[i] = M - 2  # above all anchors: same tail as a_{J+1}
                else:
                    raise InternalAssignmentError(
                        f"above-DL value {zi} has no anchor above it and no upper category"
                    )
            else:
                idx = k + off - 1  # alpha index of a_{k+1}, minus one
                if idx < 0:
                    # the event "Y above z" covers every category: the
                    # record is uninformative and its term has probability 1
                    warnings.warn(
                        f"above-DL value {zi} lies below the smallest uncensored value; "
                        "the record is uninformative", stacklevel=2)
                    idx = NO_ALPHA
                left[i] = idx
        init_cat[i] = left[i] + 1 if left[i] != NO_ALPHA else 0

    return AnchorSet(
        values=values,
        has_lower_cat=has_lower,
        has_upper_cat=has_upper,
        lower_dl=lower_dl,
        upper_dl=upper_dl,
        lower_label="<" + _fmt_value(lower_dl) if lower_dl is not None else "",
        upper_label=">" + _fmt_value(upper_dl) if upper_dl is not None else "",
        term_kind=term_kind,
        left_alpha=left,
        right_alpha=right,
        init_category=init_cat,
    )
