"""Prediction-quality metrics and repeated k-fold cross-validation.

Metric scale matters: price-scale metrics (RMSE, MAPE, RRMSE) are computed
after the inverse transform, while train/test RMSE, MSETr and MSPE live on
the transformed response scale. ``ValidationReport`` labels each.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dataset import DEFAULT_SEED
from .errors import (
    DegreesOfFreedomExhausted,
    EmptyInput,
    FoldTooSmall,
    InputError,
    LengthMismatch,
    ZeroObserved,
    ZeroPredictedNorm,
    ZeroTotalVariance,
)
from .regress import ModelSpec, build_design, fit_model

DEFAULT_K = 10
DEFAULT_REPEATS = 5


def _pair(observed, predicted):
    y = np.asarray(observed, dtype=float).ravel()
    yhat = np.asarray(predicted, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise LengthMismatch(f"observed has {len(y)} values, predicted {len(yhat)}")
    if len(y) == 0:
        raise EmptyInput("no values to score")
    return y, yhat


def rmse(observed, predicted) -> float:
    y, yhat = _pair(observed, predicted)
    return math.sqrt(math.fsum((y - yhat) ** 2) / len(y))


def mape(observed, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    y, yhat = _pair(observed, predicted)
    zero = np.flatnonzero(y == 0)
    if len(zero):
        raise ZeroObserved(int(zero[0]))
    return 100.0 * math.fsum(np.abs((y - yhat) / y)) / len(y)


def rrmse(observed, predicted) -> float:
    """sqrt( mean squared error / sum of squared predictions ) in percent.

    Only the numerator is averaged over N, so the value shrinks with sample
    size; this is the normalization the published metric uses.
    """
    y, yhat = _pair(observed, predicted)
    norm = math.fsum(yhat**2)
    if norm == 0:
        raise ZeroPredictedNorm("all predictions are zero")
    return 100.0 * math.sqrt(math.fsum((y - yhat) ** 2) / len(y) / norm)


def r_squared(observed, predicted) -> float:
    y, yhat = _pair(observed, predicted)
    sst = math.fsum((y - y.mean()) ** 2)
    if sst == 0:
        raise ZeroTotalVariance("observed values are constant")
    return 1.0 - math.fsum((y - yhat) ** 2) / sst


def adj_r_squared(r2: float, n: int, k: int) -> float:
    """Adjusted R-squared for ``n`` points and ``k`` predictors (intercept excluded)."""
    if n <= k + 1:
        raise DegreesOfFreedomExhausted(f"n={n} leaves no residual degrees of freedom for k={k}")
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)


def fold_assignment(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Shuffle row indices and deal them round-robin into ``k`` folds."""
    fold = np.empty(n, dtype=int)
    fold[rng.permutation(n)] = np.arange(n) % k
    return fold


@dataclass(frozen=True)
class CvResult:
    msetr: float
    mspe: float
    per_fold_mse: tuple
    k: int
    repeats: int
    seed: int


def kfold_cv(Z, y, spec: ModelSpec, k: int = DEFAULT_K, repeats: int = DEFAULT_REPEATS,
             seed: int = DEFAULT_SEED) -> CvResult:
    """Repeated k-fold CV of ``spec`` on standardized indicators ``Z`` and response ``y``.

    MSPE is the mean of held-out fold MSEs over all ``k * repeats`` folds;
    MSETr is SSE / n of the fit on all rows. Folds are regenerated for every
    repeat from a single seeded generator.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    if repeats < 1:
        raise InputError(f"repeats must be >= 1, got {repeats}")
    if k > n:
        raise FoldTooSmall(f"cannot make {k} folds from {n} rows")
    smallest_train = n - math.ceil(n / k)
    if smallest_train <= spec.n_params:
        raise FoldTooSmall(
            f"a {k}-fold split leaves {smallest_train} training rows for {spec.n_params} parameters"
        )

    full = fit_model(Z, y, spec)
    msetr = full.sse / n
    rng = np.random.default_rng(seed)
    X = build_design(Z, spec)
    per_fold = []
    for _ in range(repeats):
        fold = fold_assignment(n, k, rng)
        for f in range(k):
            test = fold == f
            m = fit_model(Z[~test], y[~test], spec)
            pred = X[test] @ np.concatenate([[m.intercept], m.coefficients])
            per_fold.append(float(np.mean((y[test] - pred) ** 2)))
    return CvResult(msetr, float(np.mean(per_fold)), tuple(per_fold), k, repeats, seed)


@dataclass(frozen=True)
class ValidationReport:
    r_squared: Optional[float] = None
    adj_r_squared: Optional[float] = None
    rmse: Optional[float] = None  # price scale
    mape: Optional[float] = None  # percent, price scale
    rrmse: Optional[float] = None  # percent, price scale
    train_rmse: Optional[float] = None  # transformed scale
    test_rmse: Optional[float] = None  # transformed scale
    msetr: Optional[float] = None  # transformed scale
    mspe: Optional[float] = None  # transformed scale
    per_fold_mse: tuple = ()
    k: Optional[int] = None
    repeats: Optional[int] = None
    seed: Optional[int] = None
    n_test: Optional[int] = None

    SCALES = {
        "rmse": "price",
        "mape": "percent (price scale)",
        "rrmse": "percent (price scale)",
        "train_rmse": "transformed",
        "test_rmse": "transformed",
        "msetr": "transformed",
        "mspe": "transformed",
    }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_fold_mse"] = list(self.per_fold_mse)
        d["scales"] = dict(self.SCALES)
        return d

    def table(self) -> str:
        rows = [
            ("R-squared", self.r_squared, ""),
            ("adj. R-squared", self.adj_r_squared, ""),
            ("RMSE", self.rmse, "price"),
            ("MAPE %", self.mape, "price"),
            ("RRMSE %", self.rrmse, "price"),
            ("train RMSE", self.train_rmse, "transformed"),
            ("test RMSE", self.test_rmse, "transformed"),
            ("MSETr", self.msetr, "transformed"),
            ("MSPE", self.mspe, "transformed"),
        ]
        lines = [f"{'metric':<16}{'value':>14}  scale"]
        for name, v, scale in rows:
            if v is not None:
                lines.append(f"{name:<16}{v:>14.6g}  {scale}")
        if self.k is not None:
            lines.append(f"CV: k={self.k} repeats={self.repeats} seed={self.seed}")
        return "\n".join(lines)


def price_metrics(observed, predicted) -> ValidationReport:
    """Metric bundle for observed/predicted price pairs (e.g. a fixture table)."""
    y, yhat = _pair(observed, predicted)
    return ValidationReport(
        r_squared=r_squared(y, yhat) if np.ptp(y) > 0 else None,
        rmse=rmse(y, yhat),
        mape=mape(y, yhat),
        rrmse=rrmse(y, yhat),
        n_test=len(y),
    )
