"""Interaction-term algebra and OLS fitting with inference.

Terms are ``TermId(i)`` for main effect x_i and ``TermId(i, j)`` (i < j) for
the pairwise product x_i * x_j, with 1-based indicator indices. Design
columns are always ordered: intercept, mains by index, interactions in
lexicographic (i, j) order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import betainc

from .dataset import LABELS, N_INDICATORS, ScalerParams
from .errors import (
    InputError,
    InsufficientObservations,
    LengthMismatch,
    RankDeficient,
)
from .johnson import JohnsonSbParams, inverse

# relative tolerance on |R_kk| for declaring a column dependent
RANK_TOL = 1e-10


@dataclass(frozen=True, order=True)
class TermId:
    i: int
    j: int = 0  # 0 marks a main effect

    def __post_init__(self):
        if not 1 <= self.i <= N_INDICATORS:
            raise InputError(f"indicator index {self.i} outside 1..{N_INDICATORS}")
        if self.j and not self.i < self.j <= N_INDICATORS:
            raise InputError(f"interaction indices must satisfy i < j <= {N_INDICATORS}: ({self.i}, {self.j})")

    @property
    def is_main(self) -> bool:
        return self.j == 0

    @property
    def indices(self) -> tuple:
        return (self.i,) if self.is_main else (self.i, self.j)

    def sort_key(self):
        return (0, self.i, 0) if self.is_main else (1, self.i, self.j)

    def involves(self, k: int) -> bool:
        return k in self.indices

    @property
    def name(self) -> str:
        return f"x{self.i}" if self.is_main else f"x{self.i}:x{self.j}"

    @property
    def label(self) -> str:
        if self.is_main:
            return LABELS[self.i - 1]
        return f"{LABELS[self.i - 1]} ∩ {LABELS[self.j - 1]}"

    @classmethod
    def parse(cls, text: str) -> "TermId":
        parts = text.strip().lower().split(":")
        try:
            idx = [int(p.strip().lstrip("x")) for p in parts]
        except ValueError:
            raise InputError(f"cannot parse term {text!r}") from None
        if len(idx) == 1:
            return cls(idx[0])
        if len(idx) == 2:
            return cls(min(idx), max(idx))
        raise InputError(f"only main effects and pairwise interactions are supported: {text!r}")

    def __str__(self):
        return self.name


def main(i: int) -> TermId:
    return TermId(i)


def interaction(i: int, j: int) -> TermId:
    return TermId(i, j)


@dataclass(frozen=True)
class ModelSpec:
    terms: tuple = ()
    include_intercept: bool = True

    def __post_init__(self):
        terms = tuple(self.terms)
        if len(set(terms)) != len(terms):
            raise InputError("duplicate terms in model spec")
        if not self.include_intercept:
            raise InputError("models always carry an intercept")
        object.__setattr__(self, "terms", tuple(sorted(terms, key=TermId.sort_key)))

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.terms

    @property
    def n_params(self) -> int:
        return len(self.terms) + 1

    @property
    def column_names(self) -> list[str]:
        return ["(intercept)"] + [t.name for t in self.terms]

    def without(self, term: TermId) -> "ModelSpec":
        return ModelSpec(tuple(t for t in self.terms if t != term))

    def issubset(self, other: "ModelSpec") -> bool:
        return set(self.terms) <= set(other.terms)

    @classmethod
    def of(cls, terms: Iterable) -> "ModelSpec":
        return cls(tuple(t if isinstance(t, TermId) else TermId.parse(t) for t in terms))

    @classmethod
    def full(cls, n: int = N_INDICATORS) -> "ModelSpec":
        mains = [TermId(i) for i in range(1, n + 1)]
        pairs = [TermId(i, j) for i, j in itertools.combinations(range(1, n + 1), 2)]
        return cls(tuple(mains + pairs))


def term_column(Z: np.ndarray, term: TermId) -> np.ndarray:
    if term.is_main:
        return Z[:, term.i - 1]
    return Z[:, term.i - 1] * Z[:, term.j - 1]


def build_design(Z, spec: ModelSpec) -> np.ndarray:
    """Design matrix for standardized indicators ``Z`` (n x 10)."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[None, :]
    if Z.shape[1] != N_INDICATORS:
        raise LengthMismatch(f"expected {N_INDICATORS} indicator columns, got {Z.shape[1]}")
    cols = [np.ones(len(Z))] + [term_column(Z, t) for t in spec.terms]
    return np.column_stack(cols)


def t_sf2(t, df) -> np.ndarray:
    """Two-sided tail probability P(|T| > |t|) for Student's t with ``df`` dof."""
    t = np.asarray(t, dtype=float)
    return betainc(0.5 * df, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class OlsResult:
    coef: np.ndarray
    std_err: np.ndarray
    t_stat: np.ndarray
    p_value: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    leverage: np.ndarray
    sse: float
    sst: float
    r_squared: float
    adj_r_squared: float
    n_obs: int
    n_params: int

    @property
    def df_resid(self) -> int:
        return self.n_obs - self.n_params


def fit_ols(X, y, column_names: Optional[Sequence[str]] = None) -> OlsResult:
    """Least squares via Householder QR with classical inference.

    The first column of ``X`` is expected to be the intercept; R-squared is
    the centred version and adjusted R-squared uses ``k = p - 1`` predictors.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if len(y) != n:
        raise LengthMismatch(f"X has {n} rows but y has {len(y)}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise InputError("non-finite values in regression inputs")
    if n <= p:
        raise InsufficientObservations(f"{n} observations cannot support {p} parameters")

    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    dependent = np.flatnonzero(diag <= RANK_TOL * scale)
    if len(dependent):
        k = int(dependent[0])
        name = column_names[k] if column_names is not None else f"column {k}"
        raise RankDeficient(name)

    qty = Q.T @ y
    coef = solve_triangular(R, qty, lower=False)
    fitted = X @ coef
    resid = y - fitted
    sse = float(resid @ resid)
    ybar = float(np.mean(y))
    sst = float(np.sum((y - ybar) ** 2))
    df = n - p
    s2 = sse / df
    Rinv = solve_triangular(R, np.eye(p), lower=False)
    cov_diag = np.sum(Rinv**2, axis=1) * s2
    se = np.sqrt(cov_diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / se, np.where(coef == 0, 0.0, np.inf))
    pv = np.where(np.isfinite(t), t_sf2(np.where(np.isfinite(t), t, 0.0), df), 0.0)
    lev = np.sum(Q**2, axis=1)
    if sst > 0:
        r2 = 1.0 - sse / sst
        adj = 1.0 - (1.0 - r2) * (n - 1) / df
    else:
        r2 = adj = float("nan")
    return OlsResult(coef, se, t, pv, fitted, resid, lev, sse, sst, r2, adj, n, p)


@dataclass(frozen=True)
class FittedModel:
    """A fitted (or published) interaction model with its preprocessing context.

    Arrays of inference statistics are ordered like the design columns:
    intercept first, then ``spec.terms``. They are ``None`` for models whose
    coefficients were supplied rather than estimated.
    """

    spec: ModelSpec
    intercept: float
    coefficients: np.ndarray
    std_errors: Optional[np.ndarray] = None
    t_stats: Optional[np.ndarray] = None
    p_values: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None
    fitted: Optional[np.ndarray] = None
    leverage: Optional[np.ndarray] = None
    r_squared: Optional[float] = None
    adj_r_squared: Optional[float] = None
    n_obs: int = 0
    scaler: Optional[ScalerParams] = None
    transform: Optional[JohnsonSbParams] = None
    meta: dict = field(default_factory=dict)

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    def coefficient(self, term) -> float:
        term = term if isinstance(term, TermId) else TermId.parse(term)
        return float(self.coefficients[self.spec.terms.index(term)])

    def term_p_value(self, term: TermId) -> float:
        return float(self.p_values[1 + self.spec.terms.index(term)])

    @property
    def sse(self) -> float:
        return float(self.residuals @ self.residuals)

    # -- prediction ------------------------------------------------------
    def standardize(self, rows) -> np.ndarray:
        raw = np.atleast_2d(np.asarray(rows, dtype=float))
        if not np.all(np.isfinite(raw)):
            raise InputError("prediction rows contain non-finite values")
        return raw if self.scaler is None else self.scaler.transform(raw)

    def linear_predictor(self, Z) -> np.ndarray:
        X = build_design(Z, self.spec)
        return X @ np.concatenate([[self.intercept], self.coefficients])

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        names = self.spec.column_names
        est = [self.intercept] + self.coefficients.tolist()

        def col(a, k):
            return None if a is None else float(a[k])

        table = [
            {
                "term": names[k],
                "estimate": float(est[k]),
                "std_error": col(self.std_errors, k),
                "t": col(self.t_stats, k),
                "p": col(self.p_values, k),
            }
            for k in range(len(names))
        ]
        return {
            "terms": [t.name for t in self.spec.terms],
            "coefficients": table,
            "r_squared": self.r_squared,
            "adj_r_squared": self.adj_r_squared,
            "n_obs": self.n_obs,
            "n_params": self.n_params,
            "scaler": None if self.scaler is None else self.scaler.to_dict(),
            "transform": None if self.transform is None else self.transform.to_dict(),
            "residuals": None if self.residuals is None else self.residuals.tolist(),
            "fitted": None if self.fitted is None else self.fitted.tolist(),
            "leverage": None if self.leverage is None else self.leverage.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        spec = ModelSpec.of(d["terms"])
        table = {row["term"]: row for row in d["coefficients"]}
        names = spec.column_names

        def arr(key):
            vals = [table[nm][key] for nm in names]
            return None if any(v is None for v in vals) else np.array(vals, dtype=float)

        def opt(key):
            return None if d.get(key) is None else np.array(d[key], dtype=float)

        return cls(
            spec=spec,
            intercept=float(table["(intercept)"]["estimate"]),
            coefficients=np.array([table[nm]["estimate"] for nm in names[1:]], dtype=float),
            std_errors=arr("std_error"),
            t_stats=arr("t"),
            p_values=arr("p"),
            residuals=opt("residuals"),
            fitted=opt("fitted"),
            leverage=opt("leverage"),
            r_squared=d.get("r_squared"),
            adj_r_squared=d.get("adj_r_squared"),
            n_obs=int(d.get("n_obs", 0)),
            scaler=None if d.get("scaler") is None else ScalerParams.from_dict(d["scaler"]),
            transform=None if d.get("transform") is None else JohnsonSbParams.from_dict(d["transform"]),
            meta=d.get("meta", {}),
        )


def fit_model(
    Z,
    y,
    spec: ModelSpec,
    scaler: Optional[ScalerParams] = None,
    transform: Optional[JohnsonSbParams] = None,
) -> FittedModel:
    """Fit ``spec`` on standardized indicators ``Z`` against response ``y``."""
    X = build_design(Z, spec)
    res = fit_ols(X, y, spec.column_names)
    return FittedModel(
        spec=spec,
        intercept=float(res.coef[0]),
        coefficients=res.coef[1:],
        std_errors=res.std_err,
        t_stats=res.t_stat,
        p_values=res.p_value,
        residuals=res.residuals,
        fitted=res.fitted,
        leverage=res.leverage,
        r_squared=res.r_squared,
        adj_r_squared=res.adj_r_squared,
        n_obs=res.n_obs,
        scaler=scaler,
        transform=transform,
    )


def predict_transformed(model: FittedModel, rows) -> np.ndarray | float:
    """Response-scale (transformed) prediction for raw indicator row(s)."""
    single = np.ndim(rows) == 1
    out = model.linear_predictor(model.standardize(rows))
    return float(out[0]) if single else out


def predict_price(model: FittedModel, rows) -> np.ndarray | float:
    if model.transform is None:
        raise InputError("model has no Johnson transform; price predictions unavailable")
    return inverse(predict_transformed(model, rows), model.transform)
