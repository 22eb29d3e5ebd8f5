"""Weekly indicator data: ingestion, company averaging, scaling and splitting.

Indicator columns are addressed by position 0..9 internally, which maps to
the 1-based indicator indices used in term names (``x1`` .. ``x10``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConstantColumn,
    DatasetTooSmall,
    DuplicateWeek,
    EmptyInput,
    InputError,
    LengthMismatch,
    MissingColumn,
    NonFiniteValue,
    UnparseableValue,
    ZeroDenominator,
    ZeroMarketVariance,
)

# canonical field names, in indicator order
FIELDS = (
    "x1_beta",
    "x2_fcf_per_share",
    "x3_pb_ratio",
    "x4_pe_ratio",
    "x5_peg_ratio",
    "x6_div_yield",
    "x7_interest_rate",
    "x8_ics",
    "x9_psr",
    "x10_gdp",
)
# header names in the index-level CSV schema
CSV_NAMES = (
    "beta",
    "fcf_per_share",
    "pb_ratio",
    "pe_ratio",
    "peg_ratio",
    "div_yield",
    "interest_rate",
    "ics",
    "psr",
    "gdp",
)
LABELS = (
    "Beta",
    "FCF/Share",
    "P/B Ratio",
    "P/E Ratio",
    "PEG Ratio",
    "Div_Y",
    "Int_R",
    "ICS",
    "PSR",
    "GDP",
)
N_INDICATORS = len(FIELDS)
N_FINANCIAL = 6
INDEX_HEADER = ("week_start",) + CSV_NAMES + ("wcp",)
COMPANY_HEADER = ("ticker", "week_start") + CSV_NAMES[:N_FINANCIAL]

MIN_FIT_ROWS = 30
MIN_SPLIT_ROWS = 10
DEFAULT_SEED = 20170106

_ALIASES = {name: i for i, name in enumerate(CSV_NAMES)}
_ALIASES.update({name: i for i, name in enumerate(FIELDS)})


def _norm_header(h: str) -> str:
    return h.strip().lower().replace(" ", "_").replace("-", "_")


@dataclass(frozen=True)
class ObservationRow:
    week_start: date
    x1_beta: float
    x2_fcf_per_share: float
    x3_pb_ratio: float
    x4_pe_ratio: float
    x5_peg_ratio: float
    x6_div_yield: float
    x7_interest_rate: float
    x8_ics: float
    x9_psr: float
    x10_gdp: float
    wcp: float

    @property
    def indicators(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FIELDS])


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Date-ordered weekly observations.

    ``X`` holds the ten indicators column-wise (n x 10), ``wcp`` the weekly
    closing price. Arrays are read-only.
    """

    weeks: tuple
    X: np.ndarray
    wcp: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "weeks", tuple(self.weeks))
        object.__setattr__(self, "X", _frozen(self.X).reshape(len(self.weeks), N_INDICATORS))
        object.__setattr__(self, "wcp", _frozen(self.wcp))
        if len(self.wcp) != len(self.weeks):
            raise LengthMismatch("wcp length differs from number of weeks")
        for a, b in zip(self.weeks, self.weeks[1:]):
            if not a < b:
                raise InputError(f"week_start not strictly increasing at {b}")
        bad = np.argwhere(~np.isfinite(self.X))
        if len(bad):
            r, c = bad[0]
            raise NonFiniteValue(int(r) + 1, FIELDS[c], float(self.X[r, c]))
        bad = np.flatnonzero(~np.isfinite(self.wcp) | (self.wcp <= 0))
        if len(bad):
            raise InputError(f"row {bad[0] + 1}: wcp must be finite and > 0")

    def __len__(self) -> int:
        return len(self.weeks)

    @property
    def rows(self) -> list[ObservationRow]:
        return [
            ObservationRow(w, *map(float, x), float(y))
            for w, x, y in zip(self.weeks, self.X, self.wcp)
        ]

    @classmethod
    def from_rows(cls, rows: Iterable[ObservationRow], provenance: str = "") -> "Dataset":
        rows = sorted(rows, key=lambda r: r.week_start)
        return cls(
            weeks=[r.week_start for r in rows],
            X=np.array([r.indicators for r in rows]).reshape(len(rows), N_INDICATORS),
            wcp=[r.wcp for r in rows],
            provenance=provenance,
        )

    def take(self, idx: Sequence[int]) -> "Dataset":
        idx = np.sort(np.asarray(idx, dtype=int))
        return Dataset(
            weeks=[self.weeks[i] for i in idx],
            X=self.X[idx],
            wcp=self.wcp[idx],
            provenance=self.provenance,
        )

    def with_indicators(self, X: np.ndarray) -> "Dataset":
        return Dataset(self.weeks, X, self.wcp, self.provenance)


# -- CSV ---------------------------------------------------------------------

def _parse_float(text: str, row: int, column: str) -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise UnparseableValue(row, column, text) from None
    if not math.isfinite(v):
        raise NonFiniteValue(row, column, text)
    return v


def _parse_date(text: str, row: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except (AttributeError, ValueError):
        raise UnparseableValue(row, "week_start", text) from None


def load_csv(path, provenance: str | None = None) -> Dataset:
    """Read an index-level CSV (any column order) into a sorted ``Dataset``.

    Rows are numbered from 1 for the first data line in error messages.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [_norm_header(h) for h in next(reader)]
        except StopIteration:
            raise EmptyInput(f"{path} is empty") from None
        pos = {}
        for k, h in enumerate(header):
            if h in ("week_start", "wcp"):
                pos[h] = k
            elif h in _ALIASES:
                pos[_ALIASES[h]] = k
        for key, name in [("week_start", "week_start")] + list(enumerate(FIELDS)) + [("wcp", "wcp")]:
            if key not in pos:
                raise MissingColumn(name, path)

        weeks, X, y = [], [], []
        seen = {}
        for r, line in enumerate(reader, start=1):
            if not any(cell.strip() for cell in line):
                continue
            if len(line) < len(header):
                missing = header[len(line)]
                raise UnparseableValue(r, missing, "")
            week = _parse_date(line[pos["week_start"]], r)
            if week in seen:
                raise DuplicateWeek(week)
            seen[week] = r
            weeks.append(week)
            X.append([_parse_float(line[pos[i]], r, FIELDS[i]) for i in range(N_INDICATORS)])
            y.append(_parse_float(line[pos["wcp"]], r, "wcp"))
            if y[-1] <= 0:
                raise InputError(f"row {r}, column wcp: must be > 0, got {y[-1]}")
    if not weeks:
        raise EmptyInput(f"{path} has no data rows")
    order = sorted(range(len(weeks)), key=weeks.__getitem__)
    return Dataset(
        weeks=[weeks[i] for i in order],
        X=np.array(X)[order],
        wcp=np.array(y)[order],
        provenance=provenance if provenance is not None else f"csv:{path.name}",
    )


def write_csv(data: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INDEX_HEADER)
        for week, x, y in zip(data.weeks, data.X, data.wcp):
            w.writerow([week.isoformat(), *(repr(float(v)) for v in x), repr(float(y))])


# -- company-level aggregation ----------------------------------------------

@dataclass(frozen=True)
class CompanyWeekRecord:
    ticker: str
    week_start: date
    values: tuple  # six financial indicators, same units as x1..x6

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != N_FINANCIAL:
            raise LengthMismatch(f"expected {N_FINANCIAL} financial values, got {len(self.values)}")


@dataclass(frozen=True)
class WeeklyAverages:
    """Equal-weighted per-week means of the six financial indicators."""

    weeks: tuple
    values: np.ndarray
    n_tickers: tuple
    provenance: str = "equal-weighted mean over reporting tickers"


def aggregate_companies(records: Iterable[CompanyWeekRecord]) -> WeeklyAverages:
    groups: dict[date, list] = {}
    seen = set()
    for rec in records:
        key = (rec.ticker, rec.week_start)
        if key in seen:
            raise DuplicateWeek(rec.week_start, rec.ticker)
        seen.add(key)
        groups.setdefault(rec.week_start, []).append(rec.values)
    if not groups:
        raise EmptyInput("no company records")
    weeks = sorted(groups)
    # math.fsum keeps the mean independent of record order
    means = [[math.fsum(col) / len(col) for col in zip(*groups[w])] for w in weeks]
    return WeeklyAverages(
        weeks=tuple(weeks),
        values=_frozen(means),
        n_tickers=tuple(len(groups[w]) for w in weeks),
    )


def load_company_csv(path) -> list[CompanyWeekRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [_norm_header(h) for h in next(reader)]
        except StopIteration:
            raise EmptyInput(f"{path} is empty") from None
        pos = {}
        for k, h in enumerate(header):
            if h in ("ticker", "week_start"):
                pos[h] = k
            elif h in _ALIASES and _ALIASES[h] < N_FINANCIAL:
                pos[_ALIASES[h]] = k
        for key, name in [("ticker", "ticker"), ("week_start", "week_start")] + list(
            enumerate(FIELDS[:N_FINANCIAL])
        ):
            if key not in pos:
                raise MissingColumn(name, path)
        out = []
        for r, line in enumerate(reader, start=1):
            if not any(cell.strip() for cell in line):
                continue
            if len(line) < len(header):
                raise UnparseableValue(r, header[len(line)], "")
            ticker = line[pos["ticker"]].strip()
            if not ticker:
                raise UnparseableValue(r, "ticker", "")
            out.append(
                CompanyWeekRecord(
                    ticker,
                    _parse_date(line[pos["week_start"]], r),
                    [_parse_float(line[pos[i]], r, FIELDS[i]) for i in range(N_FINANCIAL)],
                )
            )
    if not out:
        raise EmptyInput(f"{path} has no data rows")
    return out


def join_macro(avg: WeeklyAverages, macro_path) -> Dataset:
    """Attach the four economic indicators and WCP to company averages.

    The macro CSV carries ``week_start, interest_rate, ics, psr, gdp, wcp``.
    Weeks must match exactly on both sides.
    """
    macro_path = Path(macro_path)
    needed = ("week_start",) + CSV_NAMES[N_FINANCIAL:] + ("wcp",)
    table = {}
    with macro_path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [_norm_header(h) for h in next(reader)]
        pos = {}
        for k, h in enumerate(header):
            if h in _ALIASES:
                pos[CSV_NAMES[_ALIASES[h]]] = k
            elif h in ("week_start", "wcp"):
                pos[h] = k
        for name in needed:
            if name not in pos:
                raise MissingColumn(name, macro_path)
        for r, line in enumerate(reader, start=1):
            if not any(cell.strip() for cell in line):
                continue
            week = _parse_date(line[pos["week_start"]], r)
            if week in table:
                raise DuplicateWeek(week)
            table[week] = [_parse_float(line[pos[n]], r, n) for n in needed[1:]]
    missing = [w for w in avg.weeks if w not in table]
    if missing:
        raise InputError(f"week {missing[0]} has company data but no macro row in {macro_path}")
    extra = [w for w in table if w not in set(avg.weeks)]
    if extra:
        raise InputError(f"week {sorted(extra)[0]} has a macro row but no company data")
    rows = [list(v) + table[w][:-1] for w, v in zip(avg.weeks, avg.values)]
    return Dataset(
        weeks=avg.weeks,
        X=np.array(rows),
        wcp=[table[w][-1] for w in avg.weeks],
        provenance=f"company averages ({avg.provenance}) joined with {macro_path.name}",
    )


# -- indicator primitives ----------------------------------------------------

def compute_beta(stock_returns, market_returns) -> float:
    """Sample covariance of stock and market returns over sample market variance."""
    s = np.asarray(stock_returns, dtype=float)
    m = np.asarray(market_returns, dtype=float)
    if s.shape != m.shape or s.ndim != 1:
        raise LengthMismatch(f"return series lengths differ: {s.shape} vs {m.shape}")
    if len(s) < 2:
        raise EmptyInput("need at least two returns")
    dm = m - m.mean()
    var = dm @ dm
    if var == 0.0:
        raise ZeroMarketVariance("market returns are constant")
    # the (n - 1) divisors cancel
    return float((s - s.mean()) @ dm / var)


def safe_ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        raise ZeroDenominator(f"ratio {numerator}/{denominator} has zero denominator")
    return numerator / denominator


def dividend_yield(annual_dividend: float, share_price: float) -> float:
    """Dividend yield in percent."""
    return 100.0 * safe_ratio(annual_dividend, share_price)


# -- scaling -----------------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean))
        object.__setattr__(self, "std", _frozen(self.std))
        if self.mean.shape != (N_INDICATORS,) or self.std.shape != (N_INDICATORS,):
            raise LengthMismatch("scaler needs one mean and stddev per indicator")
        if np.any(self.std <= 0):
            raise InputError("scaler stddevs must be positive")

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std

    def inverse(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(d["mean"], d["std"])

    @classmethod
    def identity(cls) -> "ScalerParams":
        return cls(np.zeros(N_INDICATORS), np.ones(N_INDICATORS))


def standardize(data: Dataset) -> tuple[Dataset, ScalerParams]:
    """z-score every indicator column (sample stddev); WCP is left alone."""
    mean = data.X.mean(axis=0)
    std = data.X.std(axis=0, ddof=1)
    for j in range(N_INDICATORS):
        if not std[j] > 0 or np.ptp(data.X[:, j]) == 0:
            raise ConstantColumn(FIELDS[j])
    params = ScalerParams(mean, std)
    return data.with_indicators(params.transform(data.X)), params


# -- splitting ---------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise InputError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.seed < 0:
            raise InputError("seed must be non-negative")

    def n_train(self, n: int) -> int:
        # half-up rounding; Python's round() would send 0.5 cases to even
        return int(math.floor(self.train_fraction * n + 0.5))


def split(data: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    n = len(data)
    if n < MIN_SPLIT_ROWS:
        raise DatasetTooSmall(f"need at least {MIN_SPLIT_ROWS} rows to split, got {n}")
    perm = np.random.default_rng(spec.seed).permutation(n)
    k = spec.n_train(n)
    return data.take(perm[:k]), data.take(perm[k:])


def require_fit_size(data: Dataset) -> None:
    if len(data) < MIN_FIT_ROWS:
        raise DatasetTooSmall(f"fitting needs at least {MIN_FIT_ROWS} rows, got {len(data)}")
