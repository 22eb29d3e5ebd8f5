"""Command line entry point: ``sectorcast <subcommand> [options]``.

Settings come from an optional ``key = value`` config file; any key can be
overridden by the flag of the same name. Exit codes: 0 success, 2 input or
validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .dataset import load_company_csv, aggregate_companies, join_macro, load_csv, write_csv
from .errors import InputError, SectorcastError
from .pipeline import RunConfig, envelope, dumps, load_config, stage

log = logging.getLogger("sectorcast")
DEFAULT_OUT = "sectorcast_out"


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--seed", type=int, help="seed for the split and CV folds")
    g.add_argument("--out", help=f"output directory (else $SECTORCAST_OUT, else ./{DEFAULT_OUT})")
    g.add_argument("--quiet", action="store_true", default=None, help="suppress console tables")


def _opt(p, name, **kw):
    p.add_argument(f"--{name.replace('_', '-')}", f"--{name}", dest=name, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sectorcast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate index data or average company data into an index CSV")
    _opt(p, "input", help="index-level CSV to validate and canonicalize")
    _opt(p, "companies", help="company-level CSV to average per week")
    _opt(p, "macro", help="CSV with week_start, interest_rate, ics, psr, gdp, wcp to join")
    _add_common(p)

    p = sub.add_parser("fit", help="run the full model-building pipeline")
    _opt(p, "input", help="index-level CSV")
    _opt(p, "train_fraction", type=float)
    _opt(p, "alpha", type=float)
    _opt(p, "heredity", help="true/false")
    _add_common(p)

    p = sub.add_parser("predict", help="predict WCP for rows of indicators")
    _opt(p, "model", help="model JSON, or 'published'")
    _opt(p, "rows", help="CSV of indicator rows (standardized for the published model)")
    _add_common(p)

    p = sub.add_parser("diagnose", help="residual diagnostics and plot data")
    _opt(p, "model", help="model JSON")
    _opt(p, "input", help="optional dataset for WCP normality / Q-Q data")
    _add_common(p)

    p = sub.add_parser("validate", help="metrics and repeated k-fold CV")
    _opt(p, "model", help="model JSON")
    _opt(p, "input", help="index-level CSV the model was fitted on")
    _opt(p, "pairs", help="observed/predicted CSV, or 'published'")
    _opt(p, "k", type=int)
    _opt(p, "repeats", type=int)
    _add_common(p)

    p = sub.add_parser("rank", help="percentage contribution of each model term")
    _opt(p, "model", help="model JSON, or 'published'")
    _opt(p, "input", help="index-level CSV (needed for partial_ss)")
    _opt(p, "method", choices=["partial_ss", "coef_share"])
    _add_common(p)
    return parser


def _out_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out or os.environ.get("SECTORCAST_OUT") or DEFAULT_OUT)


def _say(cfg: RunConfig, text: str) -> None:
    if not cfg.quiet:
        print(text)


def _write(path: Path, doc: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc), encoding="utf-8")
    return path


def cmd_ingest(cfg: RunConfig) -> Path:
    out = _out_dir(cfg) / "dataset.csv"
    if cfg.input:
        with stage("ingest"):
            data = load_csv(cfg.input)
    elif cfg.companies:
        with stage("ingest"):
            avg = aggregate_companies(load_company_csv(cfg.companies))
            if not cfg.macro:
                out = _out_dir(cfg) / "company_averages.csv"
                out.parent.mkdir(parents=True, exist_ok=True)
                with out.open("w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(("week_start", "beta", "fcf_per_share", "pb_ratio", "pe_ratio",
                                "peg_ratio", "div_yield", "n_tickers"))
                    for wk, vals, nt in zip(avg.weeks, avg.values, avg.n_tickers):
                        w.writerow([wk.isoformat(), *(repr(float(v)) for v in vals), nt])
                _say(cfg, f"wrote {out} ({len(avg.weeks)} weeks)")
                return out
            data = join_macro(avg, cfg.macro)
    else:
        raise InputError("ingest needs --input or --companies")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, out)
    _say(cfg, f"wrote {out} ({len(data)} rows)")
    return out


def cmd_fit(cfg: RunConfig) -> list[Path]:
    art = pipeline.run_fit(cfg)
    written = pipeline.write_fit(art, cfg, _out_dir(cfg))
    _say(cfg, art.trace.table())
    _say(cfg, f"R^2 = {art.model.r_squared:.4f}, adj. R^2 = {art.model.adj_r_squared:.4f}")
    _say(cfg, "wrote " + ", ".join(str(p) for p in written))
    return written


def cmd_predict(cfg: RunConfig) -> Path:
    if not cfg.model or not cfg.rows:
        raise InputError("predict needs --model and --rows")
    with stage("predict"):
        model = pipeline.load_model(cfg.model)
        labels, X, _ = pipeline.read_indicator_rows(cfg.rows)
        t, price = pipeline.run_predict(model, X)
    out = _out_dir(cfg) / "predictions.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("row", "wcp_t", "wcp"))
        for lab, a, b in zip(labels, t, price):
            w.writerow((lab, repr(float(a)), repr(float(b))))
    _say(cfg, f"wrote {out} ({len(labels)} rows)")
    return out


def cmd_diagnose(cfg: RunConfig) -> list[Path]:
    if not cfg.model:
        raise InputError("diagnose needs --model")
    with stage("diagnose"):
        model = pipeline.load_model(cfg.model)
        if model.residuals is None:
            raise InputError("model carries no residuals (published models cannot be diagnosed)")
        from .diagnose import residual_diagnostics

        rep = residual_diagnostics(model)
        body = {"diagnostics": rep.to_dict()}
        if cfg.input:
            body["response"] = pipeline.response_normality(load_csv(cfg.input), model)
    out = _out_dir(cfg)
    written = [_write(out / "diagnostics.json", envelope("diagnostics", cfg, body))]
    written += rep.write_plot_csvs(out)
    _say(cfg, f"mean residual {rep.mean_residual:.3g}; Shapiro-Wilk p = {rep.shapiro.p_value:.4f}; "
              f"Anderson-Darling p = {rep.anderson.p_value:.4f}")
    return written


def cmd_validate(cfg: RunConfig) -> Path:
    with stage("validate"):
        model = pipeline.load_model(cfg.model) if cfg.model else None
        data = load_csv(cfg.input) if cfg.input else None
        rep = pipeline.run_validate(cfg, model, data)
    path = _write(_out_dir(cfg) / "validation.json", envelope("validation", cfg, {"validation": rep.to_dict()}))
    _say(cfg, rep.table())
    return path


def cmd_rank(cfg: RunConfig) -> Path:
    if not cfg.model:
        raise InputError("rank needs --model")
    with stage("rank"):
        model = pipeline.load_model(cfg.model)
        data = load_csv(cfg.input) if cfg.input else None
        ranking = pipeline.run_rank(cfg, model, data)
    path = _write(_out_dir(cfg) / "ranking.json", envelope("ranking", cfg, {"ranking": ranking.to_dict()}))
    _say(cfg, ranking.table())
    return path


COMMANDS = {
    "ingest": cmd_ingest,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "diagnose": cmd_diagnose,
    "validate": cmd_validate,
    "rank": cmd_rank,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        cfg = load_config(args.config, overrides)
    except SectorcastError as exc:
        print(f"sectorcast: config: {exc}", file=sys.stderr)
        return exc.exit_code
    logging.basicConfig(level=logging.WARNING if cfg.quiet else logging.INFO, format="%(message)s")
    try:
        COMMANDS[args.command](cfg)
    except SectorcastError as exc:
        print(f"sectorcast {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"sectorcast {args.command}: {exc}", file=sys.stderr)
        return InputError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
