"""Multicollinearity screens and stepwise backward elimination."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import CSV_NAMES, FIELDS, N_INDICATORS, Dataset
from .errors import ConstantColumn, DatasetTooSmall, InputError, SectorcastError, UnfittableStart
from .regress import ModelSpec, TermId, fit_model, fit_ols

CORR_CUTOFF = 0.80
VIF_THRESHOLD = 10.0
DEFAULT_ALPHA = 0.05
P_TIE = 1e-12


@dataclass(frozen=True)
class CorrelationReport:
    names: tuple
    matrix: np.ndarray
    warnings: tuple  # (name_a, name_b, r) with |r| > cutoff, off-diagonal

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": self.matrix.tolist(),
            "cutoff": CORR_CUTOFF,
            "warnings": [{"a": a, "b": b, "r": r} for a, b, r in self.warnings],
        }


def correlation_matrix(data: Dataset, cutoff: float = CORR_CUTOFF) -> CorrelationReport:
    """Pearson correlations among the ten indicators and WCP (11 x 11)."""
    M = np.column_stack([data.X, data.wcp])
    names = CSV_NAMES + ("wcp",)
    sd = M.std(axis=0)
    for k in np.flatnonzero(sd == 0):
        raise ConstantColumn(names[k])
    C = np.corrcoef(M, rowvar=False)
    C = np.clip((C + C.T) / 2, -1.0, 1.0)
    np.fill_diagonal(C, 1.0)
    warn = tuple(
        (names[a], names[b], float(C[a, b]))
        for a in range(len(names))
        for b in range(a + 1, len(names))
        if abs(C[a, b]) > cutoff
    )
    return CorrelationReport(names, C, warn)


@dataclass(frozen=True)
class VifReport:
    names: tuple
    vif: np.ndarray
    threshold: float = VIF_THRESHOLD

    @property
    def flagged(self) -> tuple:
        return tuple(n for n, v in zip(self.names, self.vif) if v >= self.threshold)

    def to_dict(self) -> dict:
        return {
            "vif": dict(zip(self.names, self.vif.tolist())),
            "threshold": self.threshold,
            "flagged": list(self.flagged),
        }


def vif_matrix(X, names=None, threshold: float = VIF_THRESHOLD) -> VifReport:
    """VIF_j = 1 / (1 - R_j^2) from regressing column j on the others (with intercept)."""
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    if n < k + 2:
        raise DatasetTooSmall(f"VIF needs at least {k + 2} rows, got {n}")
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(k))
    out = np.empty(k)
    for j in range(k):
        others = np.delete(X, j, axis=1)
        D = np.column_stack([np.ones(n), others])
        res = fit_ols(D, X[:, j], ["(intercept)"] + [nm for i, nm in enumerate(names) if i != j])
        if not res.sst > 0:
            raise ConstantColumn(names[j])
        out[j] = np.inf if res.sse == 0 else res.sst / res.sse
    return VifReport(names, out, threshold)


def vif(data: Dataset, threshold: float = VIF_THRESHOLD) -> VifReport:
    if len(data) < 12:
        raise DatasetTooSmall(f"VIF needs at least 12 rows, got {len(data)}")
    return vif_matrix(data.X, FIELDS, threshold)


@dataclass(frozen=True)
class EliminationStep:
    step: int
    dropped: TermId
    p_value: float


@dataclass(frozen=True)
class EliminationTrace:
    steps: tuple
    final: ModelSpec
    alpha: float
    heredity: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "heredity": self.heredity,
            "steps": [{"step": s.step, "dropped": s.dropped.name, "p_value": s.p_value} for s in self.steps],
            "final_terms": [t.name for t in self.final.terms],
        }

    def table(self) -> str:
        lines = [f"{'step':>4}  {'dropped':<10} {'p-value':>12}"]
        for s in self.steps:
            lines.append(f"{s.step:>4}  {s.dropped.name:<10} {s.p_value:>12.6g}")
        lines.append(f"final: {len(self.final)} terms + intercept")
        return "\n".join(lines)


def _protected(spec: ModelSpec) -> set:
    """Main effects that must stay while one of their interactions remains."""
    keep = set()
    for t in spec.terms:
        if not t.is_main:
            keep.update(TermId(k) for k in t.indices)
    return keep


def backward_eliminate(
    Z,
    y,
    start: ModelSpec,
    alpha: float = DEFAULT_ALPHA,
    heredity: bool = True,
) -> tuple[ModelSpec, EliminationTrace]:
    """Drop the least significant eligible term, one refit at a time.

    With ``heredity`` a main effect is not eligible while any interaction
    containing it is still in the model. Among p-values equal to within
    1e-12 the term latest in design order is dropped first.
    """
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    try:
        model = fit_model(Z, y, start)
    except SectorcastError as exc:
        raise UnfittableStart(f"starting model cannot be fitted: {exc}") from exc

    spec = start
    steps = []
    while spec.terms:
        blocked = _protected(spec) if heredity else set()
        cands = [(float(model.p_values[1 + k]), t) for k, t in enumerate(spec.terms) if t not in blocked]
        cands = [(p, t) for p, t in cands if p > alpha]
        if not cands:
            break
        pmax = max(p for p, _ in cands)
        tied = [t for p, t in cands if pmax - p <= P_TIE]
        drop = max(tied, key=TermId.sort_key)
        p_drop = next(p for p, t in cands if t == drop)
        steps.append(EliminationStep(len(steps) + 1, drop, p_drop))
        spec = spec.without(drop)
        model = fit_model(Z, y, spec)
    return spec, EliminationTrace(tuple(steps), spec, alpha, heredity)
