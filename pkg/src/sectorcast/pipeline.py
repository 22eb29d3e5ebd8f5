"""End-to-end pipeline steps shared by the CLI and the scripts.

Each ``run_*`` function takes a ``RunConfig`` and returns JSON-ready dicts;
writing files is left to the caller.
"""
from __future__ import annotations

import csv
import json
import logging
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import refmodel
from .attribute import METHODS, rank_contributions
from .dataset import (
    _ALIASES,
    DEFAULT_SEED,
    FIELDS,
    N_INDICATORS,
    Dataset,
    SplitSpec,
    _norm_header,
    _parse_float,
    load_csv,
    require_fit_size,
    split,
    standardize,
)
from .diagnose import qq_points, residual_diagnostics, shapiro_wilk, anderson_darling
from .errors import EmptyInput, InputError, InvalidConfig, MissingColumn, SectorcastError
from .johnson import fit_sb, forward, inverse
from .regress import FittedModel, ModelSpec, fit_model, predict_transformed
from .select import backward_eliminate, correlation_matrix, vif
from .validate import DEFAULT_K, DEFAULT_REPEATS, ValidationReport, kfold_cv, price_metrics, rmse, mape, rrmse

SCHEMA_VERSION = 1
log = logging.getLogger("sectorcast")


@dataclass
class RunConfig:
    input: Optional[str] = None
    companies: Optional[str] = None
    macro: Optional[str] = None
    model: Optional[str] = None
    rows: Optional[str] = None
    pairs: Optional[str] = None
    train_fraction: float = 0.8
    seed: int = DEFAULT_SEED
    alpha: float = 0.05
    heredity: bool = True
    k: int = DEFAULT_K
    repeats: int = DEFAULT_REPEATS
    method: str = "partial_ss"
    out: Optional[str] = None
    quiet: bool = False

    def validate(self) -> "RunConfig":
        if not 0 < self.train_fraction < 1:
            raise InvalidConfig(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not 0 < self.alpha < 1:
            raise InvalidConfig(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        if self.k < 2 or self.repeats < 1:
            raise InvalidConfig("k must be >= 2 and repeats >= 1")
        if self.method not in METHODS:
            raise InvalidConfig(f"method must be one of {METHODS}")
        return self

    def effective(self) -> dict:
        return asdict(self)


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def coerce(key: str, value):
    types = {f.name: f.type for f in fields(RunConfig)}
    if key not in types:
        raise InvalidConfig(f"unknown config key {key!r}")
    if value is None or not isinstance(value, str):
        return value
    kind = types[key]
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            return int(value)
        if kind == "bool":
            return _BOOL[value.strip().lower()]
    except (ValueError, KeyError):
        raise InvalidConfig(f"config key {key!r}: cannot interpret {value!r}") from None
    return value.strip()


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"{source}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_").lower()
        out[key] = coerce(key, value)
    return out


def load_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise InvalidConfig(f"config file {p} not found")
        values.update(parse_config_text(p.read_text(encoding="utf-8"), str(p)))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = coerce(k, v)
    return RunConfig(**values).validate()


class StageError(SectorcastError):
    def __init__(self, stage: str, cause: SectorcastError):
        self.stage, self.cause = stage, cause
        self.exit_code = cause.exit_code
        super().__init__(f"stage {stage}: {type(cause).__name__}: {cause}")


@contextmanager
def stage(name: str):
    log.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except SectorcastError as exc:
        raise StageError(name, exc) from exc


def envelope(kind: str, cfg: RunConfig, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "config": cfg.effective(), **body}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


# -- fit ---------------------------------------------------------------------

@dataclass
class FitArtifacts:
    model: FittedModel
    trace: object
    diagnostics: object
    screening: dict
    full_model: FittedModel


def run_fit(cfg: RunConfig, data: Optional[Dataset] = None) -> FitArtifacts:
    """scale -> Johnson fit on WCP -> split -> full 55-term fit -> elimination -> diagnostics."""
    if data is None:
        if not cfg.input:
            raise InvalidConfig("fit needs an input dataset (input = path)")
        with stage("load"):
            data = load_csv(cfg.input)
    with stage("size_check"):
        require_fit_size(data)
    with stage("screen"):
        corr = correlation_matrix(data)
        vifs = vif(data)
    with stage("scale"):
        scaled, scaler = standardize(data)
    with stage("johnson"):
        transform = fit_sb(data.wcp)
    with stage("split"):
        sp = SplitSpec(cfg.train_fraction, cfg.seed)
        train, test = split(scaled, sp)
        y_train = forward(train.wcp, transform)
    start = ModelSpec.full()
    with stage("full_fit"):
        full = fit_model(train.X, y_train, start, scaler, transform)
    with stage("eliminate"):
        final_spec, trace = backward_eliminate(train.X, y_train, start, cfg.alpha, cfg.heredity)
        model = fit_model(train.X, y_train, final_spec, scaler, transform)
    meta = {
        "split": {"train_fraction": sp.train_fraction, "seed": sp.seed, "n_train": len(train), "n_test": len(test)},
        "provenance": data.provenance,
        "train_weeks": [w.isoformat() for w in train.weeks],
    }
    model = replace(model, meta=meta)
    with stage("diagnose"):
        diag = residual_diagnostics(model)
    screening = {
        "correlation": corr.to_dict(),
        "vif": vifs.to_dict(),
        "wcp_normality": {
            "raw": {"shapiro_wilk": shapiro_wilk(data.wcp).to_dict(), "anderson_darling": anderson_darling(data.wcp).to_dict()},
            "transformed": {
                "shapiro_wilk": shapiro_wilk(forward(data.wcp, transform)).to_dict(),
                "anderson_darling": anderson_darling(forward(data.wcp, transform)).to_dict(),
            },
        },
        "full_model": {"n_terms": len(start), "r_squared": full.r_squared, "adj_r_squared": full.adj_r_squared},
    }
    return FitArtifacts(model, trace, diag, screening, full)


def write_fit(art: FitArtifacts, cfg: RunConfig, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "model.json": envelope("model", cfg, {"model": art.model.to_dict()}),
        "trace.json": envelope("elimination_trace", cfg, {"trace": art.trace.to_dict()}),
        "diagnostics.json": envelope("diagnostics", cfg, {"diagnostics": art.diagnostics.to_dict()}),
        "screening.json": envelope("screening", cfg, art.screening),
    }
    written = []
    for name, doc in files.items():
        path = out_dir / name
        path.write_text(dumps(doc), encoding="utf-8")
        written.append(path)
    written += art.diagnostics.write_plot_csvs(out_dir)
    return written


# -- shared helpers ----------------------------------------------------------

def load_model(path) -> FittedModel:
    if str(path) == "published":
        return refmodel.published_spec().as_fitted()
    p = Path(path)
    if not p.is_file():
        raise InputError(f"model file {p} not found")
    doc = json.loads(p.read_text(encoding="utf-8"))
    return FittedModel.from_dict(doc.get("model", doc))


def training_data(model: FittedModel, data: Dataset):
    """Rebuild the standardized train/test partitions the model was fitted on."""
    if model.scaler is None or model.transform is None:
        raise InputError("model carries no scaler/transform; cannot rebuild its training data")
    spl = model.meta.get("split") or {}
    sp = SplitSpec(spl.get("train_fraction", 0.8), spl.get("seed", DEFAULT_SEED))
    scaled = data.with_indicators(model.scaler.transform(data.X))
    train, test = split(scaled, sp)
    return train, test


def read_indicator_rows(path) -> tuple[list, np.ndarray, Optional[np.ndarray]]:
    """Rows CSV for prediction: file order kept, ``week_start``/``wcp`` optional."""
    p = Path(path)
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [_norm_header(h) for h in next(reader)]
        except StopIteration:
            raise EmptyInput(f"{p} is empty") from None
        pos = {}
        for k, h in enumerate(header):
            if h in _ALIASES:
                pos[_ALIASES[h]] = k
            elif h in ("week_start", "wcp"):
                pos[h] = k
        for i in range(N_INDICATORS):
            if i not in pos:
                raise MissingColumn(FIELDS[i], p)
        labels, X, y = [], [], []
        for r, line in enumerate(reader, start=1):
            if not any(c.strip() for c in line):
                continue
            labels.append(line[pos["week_start"]].strip() if "week_start" in pos else str(r))
            X.append([_parse_float(line[pos[i]], r, FIELDS[i]) for i in range(N_INDICATORS)])
            if "wcp" in pos:
                y.append(_parse_float(line[pos["wcp"]], r, "wcp"))
    if not X:
        raise EmptyInput(f"{p} has no data rows")
    return labels, np.array(X), (np.array(y) if y else None)


def run_predict(model: FittedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.atleast_1d(predict_transformed(model, X))
    if model.transform is None:
        raise InputError("model has no Johnson transform; cannot report prices")
    return t, np.atleast_1d(inverse(t, model.transform))


def run_validate(cfg: RunConfig, model: Optional[FittedModel], data: Optional[Dataset]) -> ValidationReport:
    if cfg.pairs:
        obs, pred = read_pairs(cfg.pairs)
        return price_metrics(obs, pred)
    if model is None or data is None:
        raise InvalidConfig("validate needs model and input, or pairs")
    train, test = training_data(model, data)
    y_train = forward(train.wcp, model.transform)
    cv = kfold_cv(train.X, y_train, model.spec, cfg.k, cfg.repeats, cfg.seed)
    fit_train = model.linear_predictor(train.X)
    kw = {}
    if len(test):
        t_test = model.linear_predictor(test.X)
        y_test = forward(test.wcp, model.transform)
        price = inverse(t_test, model.transform)
        kw = dict(
            test_rmse=rmse(y_test, t_test),
            rmse=rmse(test.wcp, price),
            mape=mape(test.wcp, price),
            rrmse=rrmse(test.wcp, price),
        )
    return ValidationReport(
        r_squared=model.r_squared,
        adj_r_squared=model.adj_r_squared,
        train_rmse=rmse(y_train, fit_train),
        msetr=cv.msetr,
        mspe=cv.mspe,
        per_fold_mse=cv.per_fold_mse,
        k=cv.k,
        repeats=cv.repeats,
        seed=cv.seed,
        n_test=len(test),
        **kw,
    )


def read_pairs(path) -> tuple[np.ndarray, np.ndarray]:
    """Observed/predicted CSV (columns ``observed``, ``predicted``); ``published`` for the held-out pairs of the published model."""
    if str(path) == "published":
        fx = refmodel.published_pairs()
        return fx.observed, fx.predicted
    p = Path(path)
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = {_norm_header(c): c for c in reader.fieldnames or []}
        for need in ("observed", "predicted"):
            if need not in cols:
                raise MissingColumn(need, p)
        obs, pred = [], []
        for r, row in enumerate(reader, start=1):
            obs.append(_parse_float(row[cols["observed"]], r, "observed"))
            pred.append(_parse_float(row[cols["predicted"]], r, "predicted"))
    return np.array(obs), np.array(pred)


def run_rank(cfg: RunConfig, model: FittedModel, data: Optional[Dataset]):
    if cfg.method == "coef_share":
        return rank_contributions(model, method="coef_share")
    if data is None:
        raise InvalidConfig("partial_ss ranking needs the input dataset (or method = coef_share)")
    train, _ = training_data(model, data)
    return rank_contributions(model, train.X, forward(train.wcp, model.transform), "partial_ss")


def response_normality(data: Dataset, model: Optional[FittedModel]) -> dict:
    out = {
        "raw": {"shapiro_wilk": shapiro_wilk(data.wcp).to_dict(), "anderson_darling": anderson_darling(data.wcp).to_dict()},
        "qq_raw": [list(p) for p in qq_points(data.wcp)],
    }
    if model is not None and model.transform is not None:
        t = forward(data.wcp, model.transform)
        out["transformed"] = {"shapiro_wilk": shapiro_wilk(t).to_dict(), "anderson_darling": anderson_darling(t).to_dict()}
        out["qq_transformed"] = [list(p) for p in qq_points(t)]
    return out
