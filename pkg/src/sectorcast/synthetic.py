"""Seeded synthetic weekly datasets with a known generating model."""
from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from .dataset import N_FINANCIAL, CompanyWeekRecord, Dataset
from .johnson import JohnsonSbParams, inverse
from .regress import ModelSpec, TermId, build_design

# rough level / spread of each indicator, so raw columns have realistic units
LEVELS = np.array([1.2, 5.0, 6.5, 24.0, 1.8, 1.1, 1.9, 96.0, 7.5, 19500.0])
SPREADS = np.array([0.1, 0.8, 0.9, 3.0, 0.3, 0.2, 0.5, 3.5, 0.6, 600.0])
FIRST_WEEK = date(2017, 1, 2)

# a sparse planted model on standardized indicators (transformed scale)
PLANTED = {
    TermId(3): 0.12,
    TermId(5): 0.10,
    TermId(10): 0.65,
    TermId(5, 7): -0.30,
    TermId(5, 10): 0.25,
}
PLANTED_INTERCEPT = 0.07
TRUE_TRANSFORM = JohnsonSbParams(gamma=0.4091, eta=1.2208, xi=711.5838, lam=1082.963)


def weeks(n: int, start: date = FIRST_WEEK) -> list[date]:
    return [start + timedelta(weeks=k) for k in range(n)]


def planted_response(Z, coefs=PLANTED, intercept=PLANTED_INTERCEPT) -> np.ndarray:
    spec = ModelSpec(tuple(coefs))
    beta = np.array([intercept] + [coefs[t] for t in spec.terms])
    return build_design(Z, spec) @ beta


def make_dataset(
    n: int = 156,
    seed: int = 0,
    sigma: float = 0.08,
    coefs: dict = PLANTED,
    intercept: float = PLANTED_INTERCEPT,
    transform: JohnsonSbParams = TRUE_TRANSFORM,
    correlated: bool = True,
) -> tuple[Dataset, np.ndarray]:
    """Raw-unit dataset whose transformed WCP follows a planted model.

    Returns the dataset and the exact (noise-free) transformed response, the
    latter computed from the standardized indicators actually realized.
    """
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, len(LEVELS)))
    if correlated:
        # interest rate partly tracks GDP, as the real series do
        Z[:, 6] = 0.7 * Z[:, 9] + np.sqrt(1 - 0.49) * Z[:, 6]
    X = LEVELS + SPREADS * Z
    Zs = (X - X.mean(axis=0)) / X.std(axis=0, ddof=1)
    t_true = planted_response(Zs, coefs, intercept)
    t_obs = t_true + sigma * rng.standard_normal(n)
    wcp = inverse(t_obs, transform)
    data = Dataset(weeks(n), X, wcp, provenance=f"synthetic(seed={seed}, sigma={sigma})")
    return data, t_true


def make_company_records(n_tickers: int = 75, n_weeks: int = 156, seed: int = 0) -> list[CompanyWeekRecord]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_tickers):
        offset = rng.normal(0, 0.3, N_FINANCIAL) * SPREADS[:N_FINANCIAL]
        for w in weeks(n_weeks):
            vals = LEVELS[:N_FINANCIAL] + offset + rng.normal(0, 1, N_FINANCIAL) * SPREADS[:N_FINANCIAL]
            out.append(CompanyWeekRecord(f"T{k:03d}", w, tuple(vals)))
    return out
