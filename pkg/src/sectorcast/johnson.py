"""Johnson SB (bounded) normalizing transformation.

    t = gamma + eta * ln((x - xi) / (xi + lambda - x)),   xi < x < xi + lambda

Fitting uses the Slifker-Shapiro percentile method over a grid of ``z``
values, keeping the candidate whose transformed sample scores the highest
Shapiro-Wilk p-value.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, ndtr

from .diagnose import shapiro_wilk
from .errors import DegenerateSample, InputError, NoValidFit, OutOfSupport, SampleTooSmall

MIN_FIT_SIZE = 20
Z_GRID = tuple(round(0.25 + 0.01 * k, 2) for k in range(101))
SUPPORT_MARGIN = 1e-6


@dataclass(frozen=True)
class JohnsonSbParams:
    gamma: float
    eta: float
    xi: float
    lam: float
    z: Optional[float] = None
    sw_p: Optional[float] = None

    def __post_init__(self):
        for name in ("gamma", "eta", "xi", "lam"):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"Johnson SB {name} must be finite")
        if not self.eta > 0:
            raise InputError(f"eta must be > 0, got {self.eta}")
        if not self.lam > 0:
            raise InputError(f"lambda must be > 0, got {self.lam}")

    @property
    def lower(self) -> float:
        return self.xi

    @property
    def upper(self) -> float:
        return self.xi + self.lam

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "eta": self.eta,
            "xi": self.xi,
            "lambda": self.lam,
            "z": self.z,
            "sw_p": self.sw_p,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JohnsonSbParams":
        return cls(d["gamma"], d["eta"], d["xi"], d["lambda"], d.get("z"), d.get("sw_p"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "JohnsonSbParams":
        return cls.from_dict(json.loads(text))


def forward(x, p: JohnsonSbParams):
    """Map values on the bounded scale to the (approximately) normal scale.

    Accepts a scalar or an array; every value must lie strictly inside
    ``(xi, xi + lambda)``.
    """
    arr = np.asarray(x, dtype=float)
    inside = (arr > p.lower) & (arr < p.upper)
    if not np.all(inside):
        bad = arr[~inside].flat[0] if arr.ndim else float(arr)
        raise OutOfSupport(float(bad), p.lower, p.upper)
    u = arr - p.xi
    t = p.gamma + p.eta * (np.log(u) - np.log(p.lam - u))
    return float(t) if np.ndim(t) == 0 else t


def inverse(t, p: JohnsonSbParams):
    """Back-transform to the bounded scale: xi + lambda * logistic((t - gamma) / eta)."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("inverse Johnson transform needs finite inputs")
    s = expit((arr - p.gamma) / p.eta)
    x = p.xi + p.lam * s
    # keep the result strictly inside the open support when the logistic saturates
    x = np.clip(x, np.nextafter(p.lower, np.inf), np.nextafter(p.upper, -np.inf))
    return float(x) if np.ndim(x) == 0 else x


def _slifker_shapiro(q_m3, q_m1, q_p1, q_p3, z):
    """SB parameters from the four percentiles at -3z, -z, z, 3z.

    Returns None when the percentile pattern is not of bounded type.
    """
    m = q_p3 - q_p1
    n = q_m1 - q_m3
    p = q_p1 - q_m1
    if m <= 0 or n <= 0 or p <= 0:
        return None
    pm, pn = p / m, p / n
    if m * n / (p * p) >= 1.0:
        return None  # unbounded (SU) or lognormal boundary
    a = (1 + pm) * (1 + pn)
    c = p * p / (m * n) - 1
    eta = z / math.acosh(0.5 * math.sqrt(a))
    gamma = eta * math.asinh((pn - pm) * math.sqrt(a - 4) / (2 * c))
    lam = p * math.sqrt((a - 2) ** 2 - 4) / c
    xi = 0.5 * (q_p1 + q_m1) - 0.5 * lam + p * (pn - pm) / (2 * c)
    if not (eta > 0 and lam > 0) or not all(map(math.isfinite, (gamma, eta, xi, lam))):
        return None
    return gamma, eta, xi, lam


def fit_sb(sample, z_grid=Z_GRID) -> JohnsonSbParams:
    """Fit SB parameters by the percentile method, scored by Shapiro-Wilk p.

    For each ``z`` the sample quantiles at the standard-normal probabilities
    of -3z, -z, z, 3z (linear interpolation) determine a candidate. Candidates
    whose support, widened by ``1e-6 * lambda`` on each side, does not strictly
    contain every sample point are discarded. Ties on p-value go to the
    smallest ``z``.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if len(x) < MIN_FIT_SIZE:
        raise SampleTooSmall(f"Johnson SB fit needs at least {MIN_FIT_SIZE} points, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise InputError("sample contains non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateSample("sample is constant")
    xs = np.sort(x)

    best = None
    for z in z_grid:
        probs = ndtr(np.array([-3 * z, -z, z, 3 * z]))
        q = np.quantile(xs, probs)
        cand = _slifker_shapiro(*q, z)
        if cand is None:
            continue
        gamma, eta, xi, lam = cand
        pad = SUPPORT_MARGIN * lam
        xi, lam = xi - pad, lam + 2 * pad
        if not (xs[0] > xi and xs[-1] < xi + lam):
            continue
        params = JohnsonSbParams(gamma, eta, xi, lam)
        t = forward(xs, params)
        if not np.all(np.isfinite(t)) or np.ptp(t) == 0:
            continue
        pval = shapiro_wilk(t).p_value
        if best is None or pval > best[0]:
            best = (pval, z, params)
    if best is None:
        raise NoValidFit("no grid value of z produced a valid SB fit containing the sample")
    pval, z, prm = best
    return JohnsonSbParams(float(prm.gamma), float(prm.eta), float(prm.xi), float(prm.lam), z=z, sw_p=float(pval))
