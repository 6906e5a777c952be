"""CSV ingestion and JSON fit-document serialization.

Input CSV contract: a header row; one outcome column, one censor column
(codes "L" / "" / "U", or "lower" / "none" / "upper"; blank means
observed), and any number of covariate columns.  Fit documents are JSON
with a schema-version field and carry everything needed to reproduce
predictions without refitting.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .data import (
    AnchorSet,
    CensorCode,
    TermKind,
    ValidatedDataset,
    build_anchor_set,
    dataset_from_arrays,
)
from .errors import CsvParseError, UnknownCensorCodeError
from .links import get_link
from .likelihood import ParameterVector
from .solver import ModelFit

__all__ = ["InputTable", "read_csv", "fit_to_document", "fit_from_document"]

SCHEMA_VERSION = 1

_CENSOR_CODES = {
    "": CensorCode.OBSERVED,
    "none": CensorCode.OBSERVED,
    "l": CensorCode.BELOW_DL,
    "lower": CensorCode.BELOW_DL,
    "u": CensorCode.ABOVE_DL,
    "upper": CensorCode.ABOVE_DL,
}


@dataclass
class InputTable:
    outcome_name: str
    censor_name: str
    covariate_names: list
    dataset: ValidatedDataset


def _parse_censor(raw: str, line: int) -> CensorCode:
    key = raw.strip()
    code = _CENSOR_CODES.get(key if key in ("L", "U", "") else key.lower())
    # single letters are case-sensitive only in spirit; accept l/u too
    if code is None:
        code = _CENSOR_CODES.get(key.lower())
    if code is None:
        raise UnknownCensorCodeError(f"line {line}: unknown censor code {raw!r}")
    return code


def read_csv(path, outcome_col=None, censor_col=None,
             round_digits=None) -> InputTable:
    """Parse a CSV file into a validated dataset.

    By default the first column is the outcome and the second the censor
    code; all remaining columns are covariates.  round_digits optionally
    canonicalizes outcomes before exact-tie comparison downstream.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if len(header) < 2:
            raise CsvParseError("need at least outcome and censor columns", line=1)

        out_name = outcome_col or header[0]
        cen_name = censor_col or header[1]
        try:
            out_idx = header.index(out_name)
            cen_idx = header.index(cen_name)
        except ValueError as e:
            raise CsvParseError(f"column not in header: {e}", line=1) from None
        cov_idx = [i for i in range(len(header)) if i not in (out_idx, cen_idx)]

        zs, deltas, xs = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(
                    f"line {lineno}: expected {len(header)} fields, got {len(row)}",
                    line=lineno)
            try:
                z = float(row[out_idx])
            except ValueError:
                raise CsvParseError(
                    f"line {lineno}: outcome {row[out_idx]!r} is not a number",
                    line=lineno, column=out_idx) from None
            deltas.append(_parse_censor(row[cen_idx], lineno))
            zs.append(round(z, round_digits) if round_digits is not None else z)
            try:
                xs.append([float(row[i]) for i in cov_idx])
            except ValueError as e:
                raise CsvParseError(f"line {lineno}: bad covariate ({e})",
                                    line=lineno) from None

    dataset = dataset_from_arrays(
        np.array(zs), np.array(deltas, dtype=object),
        np.array(xs, dtype=float).reshape(len(zs), len(cov_idx)))
    return InputTable(outcome_name=out_name, censor_name=cen_name,
                      covariate_names=[header[i] for i in cov_idx],
                      dataset=dataset)


def fit_to_document(fit: ModelFit, covariate_names=None) -> dict:
    """JSON-ready result document for a fitted model."""
    anchors = fit.anchors
    K = fit.theta_hat.n_alphas
    p = fit.theta_hat.p
    names = list(covariate_names) if covariate_names else [f"x{j+1}" for j in range(p)]
    se = np.sqrt(np.maximum(np.diag(fit.vcov), 0.0))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "link": fit.link.name,
        "loglik": fit.loglik,
        "n_iterations": fit.n_iterations,
        "converged": fit.converged,
        "n_observations": fit.dataset.n,
        "anchors": {
            "values": anchors.values.tolist(),
            "has_lower_cat": anchors.has_lower_cat,
            "has_upper_cat": anchors.has_upper_cat,
            "lower_dl": anchors.lower_dl,
            "upper_dl": anchors.upper_dl,
            "lower_label": anchors.lower_label,
            "upper_label": anchors.upper_label,
            "category_labels": anchors.category_labels(),
        },
        "alphas": fit.theta_hat.alphas.tolist(),
        "alpha_se": se[:K].tolist(),
        "coefficients": [
            {"name": names[j], "estimate": float(fit.beta[j]),
             "se": float(se[K + j])}
            for j in range(p)
        ],
        "vcov": fit.vcov.tolist(),
    }
    if fit.link.name == "logit":
        for c in doc["coefficients"]:
            c["odds_ratio"] = float(np.exp(c["estimate"]))
    return doc


def fit_from_document(doc: dict) -> tuple[ModelFit, list]:
    """Reconstruct a ModelFit (without raw data) from a result document.

    Returns (fit, covariate_names).  The dataset slot holds a minimal
    placeholder; prediction-side operations never touch it.
    """
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise CsvParseError(f"unsupported schema version {doc.get('schema_version')}")
    a = doc["anchors"]
    values = np.asarray(a["values"], dtype=float)
    n0 = 0
    anchors = AnchorSet(
        values=values,
        has_lower_cat=a["has_lower_cat"], has_upper_cat=a["has_upper_cat"],
        lower_dl=a["lower_dl"], upper_dl=a["upper_dl"],
        lower_label=a["lower_label"], upper_label=a["upper_label"],
        term_kind=np.empty(n0, dtype=object),
        left_alpha=np.empty(n0, dtype=np.int64),
        right_alpha=np.empty(n0, dtype=np.int64),
        init_category=np.empty(n0, dtype=np.int64),
    )
    names = [c["name"] for c in doc["coefficients"]]
    betas = np.array([c["estimate"] for c in doc["coefficients"]], dtype=float)
    theta = ParameterVector(np.asarray(doc["alphas"], dtype=float), betas)
    placeholder = ValidatedDataset(
        z=np.zeros(doc["n_observations"]),
        delta=np.empty(doc["n_observations"], dtype=object),
        x=np.zeros((doc["n_observations"], len(names))))
    fit = ModelFit(dataset=placeholder, anchors=anchors, link=get_link(doc["link"]),
                   theta_hat=theta, loglik=doc["loglik"],
                   vcov=np.asarray(doc["vcov"], dtype=float),
                   n_iterations=doc["n_iterations"], converged=doc["converged"])
    return fit, names


def dump_document(doc: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_document(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
