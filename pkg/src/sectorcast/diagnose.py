"""Normality tests and residual diagnostics.

Shapiro-Wilk follows Royston's AS R94 algorithm (3 <= n <= 5000).
Anderson-Darling uses the estimated-mean/variance case with the
``1 + 0.75/n + 2.25/n**2`` correction and the D'Agostino-Stephens p-value
approximation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import DegenerateSample, SampleSizeOutOfRange

SW_MIN, SW_MAX = 3, 5000
AD_MIN = 8

_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(c, x):
    # c[0] + c[1] x + c[2] x^2 + ...
    return float(np.polynomial.polynomial.polyval(x, c))


@dataclass(frozen=True)
class NormalityResult:
    test_name: str
    statistic: float
    p_value: float
    n: int

    def to_dict(self) -> dict:
        return {"test": self.test_name, "statistic": self.statistic, "p_value": self.p_value, "n": self.n}


def _prepare(sample, lo, hi, name):
    x = np.asarray(sample, dtype=float).ravel()
    n = len(x)
    if n < lo or (hi is not None and n > hi):
        rng = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise SampleSizeOutOfRange(f"{name} needs n in {rng}, got {n}")
    if not np.all(np.isfinite(x)):
        raise SampleSizeOutOfRange(f"{name}: sample contains non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateSample(f"{name}: sample is constant")
    return x


def _sw_coefficients(n: int) -> np.ndarray:
    """The n//2 positive weights applied to x[n-1-i] - x[i]."""
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = ndtri((np.arange(1, nn2 + 1) - 0.375) / (n + 0.25))  # negative half
    summ2 = 2.0 * float(m @ m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    a = -m.copy()
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1**2 - 2 * a2**2))
        a /= fac
        a[0], a[1] = a1, a2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1**2))
        a /= fac
        a[0] = a1
    return a


def shapiro_wilk(sample) -> NormalityResult:
    x = _prepare(sample, SW_MIN, SW_MAX, "Shapiro-Wilk")
    n = len(x)
    xs = np.sort(x - np.median(x))
    a = _sw_coefficients(n)
    nn2 = n // 2
    num = float(a @ (xs[::-1][:nn2] - xs[:nn2])) ** 2
    ssq = float(np.sum((xs - xs.mean()) ** 2))
    w = min(num / ssq, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return NormalityResult("shapiro_wilk", w, min(max(p, 0.0), 1.0), n)

    w1 = math.log1p(-w) if w < 1 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if w1 >= gamma:
            return NormalityResult("shapiro_wilk", w, 1e-99, n)
        y = -math.log(gamma - w1)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln_n = math.log(n)
        y = w1
        mu = _poly(_C5, ln_n)
        sigma = math.exp(_poly(_C6, ln_n))
    p = float(ndtr(-(y - mu) / sigma)) if math.isfinite(y) else 1.0
    return NormalityResult("shapiro_wilk", w, p, n)


def _ad_pvalue(a2c: float) -> float:
    if a2c >= 0.6:
        p = math.exp(1.2937 - 5.709 * a2c + 0.0186 * a2c**2)
    elif a2c >= 0.34:
        p = math.exp(0.9177 - 4.279 * a2c - 1.38 * a2c**2)
    elif a2c >= 0.2:
        p = 1 - math.exp(-8.318 + 42.796 * a2c - 59.938 * a2c**2)
    else:
        p = 1 - math.exp(-13.436 + 101.14 * a2c - 223.73 * a2c**2)
    return min(max(p, 0.0), 1.0)


def anderson_darling(sample) -> NormalityResult:
    """Anderson-Darling normality test with estimated mean and variance.

    ``statistic`` is the corrected A*^2; the p-value is computed from it.
    """
    x = _prepare(sample, AD_MIN, None, "Anderson-Darling")
    n = len(x)
    z = np.sort((x - x.mean()) / x.std(ddof=1))
    i = np.arange(1, n + 1)
    s = np.sum((2 * i - 1) * (log_ndtr(z) + log_ndtr(-z[::-1])))
    a2 = -n - s / n
    a2c = a2 * (1 + 0.75 / n + 2.25 / n**2)
    return NormalityResult("anderson_darling", float(a2c), _ad_pvalue(a2c), n)


def qq_points(sample) -> list[tuple[float, float]]:
    """(theoretical, empirical) pairs with plotting positions (i - 3/8)/(n + 1/4)."""
    x = np.asarray(sample, dtype=float).ravel()
    n = len(x)
    if n < 3:
        raise SampleSizeOutOfRange(f"Q-Q data needs n >= 3, got {n}")
    theo = ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    return list(zip(theo.tolist(), np.sort(x).tolist()))


@dataclass(frozen=True)
class DiagnosticsReport:
    mean_residual: float
    sum_residual: float
    shapiro: NormalityResult
    anderson: NormalityResult
    qq_points: list
    residual_vs_fitted: list
    studentized: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mean_residual": self.mean_residual,
            "sum_residual": self.sum_residual,
            "shapiro_wilk": self.shapiro.to_dict(),
            "anderson_darling": self.anderson.to_dict(),
            "n": len(self.qq_points),
            "qq_points": [list(p) for p in self.qq_points],
            "residual_vs_fitted": [list(p) for p in self.residual_vs_fitted],
            "studentized_residuals": list(self.studentized),
        }

    def write_plot_csvs(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        written = []
        for name, header, pairs in (
            ("qq_residuals.csv", ("theoretical", "sample"), self.qq_points),
            ("residual_vs_fitted.csv", ("fitted", "residual"), self.residual_vs_fitted),
        ):
            path = out_dir / name
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows((repr(a), repr(b)) for a, b in pairs)
            written.append(path)
        return written


def residual_diagnostics(model) -> DiagnosticsReport:
    """Run the residual checks on a fitted model (raw residuals, fit order).

    Internally studentized residuals are exported alongside but are not
    what the normality tests see.
    """
    r = np.asarray(model.residuals, dtype=float)
    fitted = np.asarray(model.fitted, dtype=float)
    stud = []
    if model.leverage is not None and model.n_obs > model.n_params:
        s2 = float(r @ r) / (model.n_obs - model.n_params)
        denom = np.sqrt(s2 * np.clip(1 - np.asarray(model.leverage), 1e-300, None))
        stud = (r / denom).tolist() if s2 > 0 else [0.0] * len(r)
    return DiagnosticsReport(
        mean_residual=float(np.mean(r)),
        sum_residual=float(np.sum(r)),
        shapiro=shapiro_wilk(r),
        anderson=anderson_darling(r),
        qq_points=qq_points(r),
        residual_vs_fitted=list(zip(fitted.tolist(), r.tolist())),
        studentized=stud,
    )
