"""The published WCP model: fixed coefficients, transform constants, held-out pairs.

Inputs to the published model are already-standardized indicators; the
scaler means and standard deviations behind them were never released, so
raw-unit prediction with these coefficients is not possible.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .dataset import N_INDICATORS
from .errors import InputError
from .johnson import JohnsonSbParams, inverse
from .regress import FittedModel, ModelSpec, TermId

INTERCEPT = 0.0732
COEFFICIENTS = {
    TermId(1): 0.0070,
    TermId(2): -0.0504,
    TermId(3): 0.1067,
    TermId(4): 0.0578,
    TermId(5): 0.0941,
    TermId(6): -0.0041,
    TermId(7): -0.0168,
    TermId(8): -0.0120,
    TermId(9): 0.0211,
    TermId(10): 0.6781,
    TermId(1, 3): 0.1013,
    TermId(1, 9): -0.0864,
    TermId(2, 6): 0.0351,
    TermId(2, 10): -0.0989,
    TermId(2, 7): -0.1139,
    TermId(4, 7): -0.0380,
    TermId(5, 7): -0.6059,
    TermId(5, 10): 0.6054,
    TermId(8, 9): 0.0331,
}
TRANSFORM = JohnsonSbParams(gamma=0.4091, eta=1.2208, xi=711.5838, lam=1082.963)
R_SQUARED = 0.9944
ADJ_R_SQUARED = 0.9934


@dataclass(frozen=True)
class PublishedModel:
    intercept: float
    coefficients: dict
    transform: JohnsonSbParams

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(tuple(self.coefficients))

    def as_fitted(self) -> FittedModel:
        """The same model in ``FittedModel`` form (no scaler, no inference stats)."""
        spec = self.spec
        return FittedModel(
            spec=spec,
            intercept=self.intercept,
            coefficients=np.array([self.coefficients[t] for t in spec.terms]),
            r_squared=R_SQUARED,
            adj_r_squared=ADJ_R_SQUARED,
            transform=self.transform,
            meta={"source": "published model", "inputs": "standardized indicators"},
        )


_PUBLISHED = PublishedModel(INTERCEPT, dict(COEFFICIENTS), TRANSFORM)


def published_spec() -> PublishedModel:
    return _PUBLISHED


def linear_value(standardized_row) -> float:
    z = np.asarray(standardized_row, dtype=float).ravel()
    if z.shape != (N_INDICATORS,):
        raise InputError(f"expected {N_INDICATORS} standardized indicators, got {z.size}")
    if not np.all(np.isfinite(z)):
        raise InputError("published model inputs must be finite")
    total = INTERCEPT
    for term, beta in COEFFICIENTS.items():
        total += beta * np.prod(z[[k - 1 for k in term.indices]])
    return float(total)


def predict_published(standardized_row) -> float:
    """Price prediction (index points) from ten standardized indicators."""
    return inverse(linear_value(standardized_row), TRANSFORM)


@dataclass(frozen=True)
class PublishedPairs:
    obs_id: tuple
    observed: np.ndarray
    predicted: np.ndarray


def published_pairs() -> PublishedPairs:
    text = resources.files("sectorcast").joinpath("data/published_pairs.csv").read_text(encoding="utf-8")
    rows = list(csv.DictReader(text.splitlines()))
    return PublishedPairs(
        obs_id=tuple(int(r["obs_id"]) for r in rows),
        observed=np.array([float(r["observed"]) for r in rows]),
        predicted=np.array([float(r["predicted"]) for r in rows]),
    )
