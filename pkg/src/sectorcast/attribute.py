"""Percentage-contribution ranking of model terms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .regress import FittedModel, TermId, fit_model

METHODS = ("partial_ss", "coef_share")


@dataclass(frozen=True)
class RankEntry:
    rank: int
    term: TermId
    contribution: float


@dataclass(frozen=True)
class ContributionRanking:
    entries: tuple
    method: str

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "entries": [
                {"rank": e.rank, "term": e.term.name, "label": e.term.label, "contribution": e.contribution}
                for e in self.entries
            ],
        }

    def table(self) -> str:
        width = max([len("Indicators/Interaction")] + [len(e.term.label) for e in self.entries])
        lines = [f"{'Rank':>4}  {'Indicators/Interaction':<{width}}  {'Contributions %':>15}"]
        for e in self.entries:
            lines.append(f"{e.rank:>4}  {e.term.label:<{width}}  {e.contribution:>15.2f}")
        return "\n".join(lines)


def _rank(terms, weights, method) -> ContributionRanking:
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    pct = 100.0 * w / total if total > 0 else np.full(len(w), 100.0 / len(w))
    # stable sort keeps design order among ties
    order = sorted(range(len(terms)), key=lambda k: -pct[k])
    return ContributionRanking(
        tuple(RankEntry(r + 1, terms[k], float(pct[k])) for r, k in enumerate(order)), method
    )


def rank_contributions(model: FittedModel, Z=None, y=None, method: str = "partial_ss") -> ContributionRanking:
    """Rank terms by share of |coefficient| or by drop-one SSE increase.

    ``partial_ss`` needs the standardized indicators ``Z`` and transformed
    response ``y`` the model was fitted on; each term is removed in turn and
    the model refitted.
    """
    terms = model.spec.terms
    if not terms:
        raise InputError("model has no terms to rank")
    if method == "coef_share":
        return _rank(terms, np.abs(model.coefficients), method)
    if method != "partial_ss":
        raise InputError(f"unknown attribution method {method!r}; choose from {METHODS}")
    if Z is None or y is None:
        raise InputError("partial_ss attribution needs the fitting data")
    base = fit_model(Z, y, model.spec).sse
    deltas = [max(fit_model(Z, y, model.spec.without(t)).sse - base, 0.0) for t in terms]
    return _rank(terms, deltas, method)
