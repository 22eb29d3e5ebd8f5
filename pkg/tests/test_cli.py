import csv
import json

import numpy as np
import pytest

from sectorcast.cli import main
from sectorcast.dataset import COMPANY_HEADER, load_csv, write_csv
from sectorcast.synthetic import make_company_records, make_dataset, weeks


@pytest.fixture(scope="module")
def index_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "index.csv"
    write_csv(make_dataset(156, seed=3)[0], path)
    return path


@pytest.fixture(scope="module")
def fitted(index_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("fit")
    assert main(["fit", "--input", str(index_csv), "--out", str(out), "--quiet"]) == 0
    return out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _write_companies(path, n_tickers=4, n_weeks=40):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COMPANY_HEADER)
        for r in make_company_records(n_tickers, n_weeks, seed=2):
            w.writerow([r.ticker, r.week_start.isoformat(), *r.values])


def _write_macro(path, n_weeks=40):
    rng = np.random.default_rng(0)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["week_start", "interest_rate", "ics", "psr", "gdp", "wcp"])
        for wk in weeks(n_weeks):
            w.writerow([wk.isoformat(), 2 + rng.random(), 95 + rng.random(), 7 + rng.random(),
                        19000 + 100 * rng.random(), 1200 + 50 * rng.random()])


def test_ingest_companies_with_macro(tmp_path):
    comp, macro = tmp_path / "companies.csv", tmp_path / "macro.csv"
    _write_companies(comp)
    _write_macro(macro)
    out = tmp_path / "out"
    assert main(["ingest", "--companies", str(comp), "--macro", str(macro), "--out", str(out), "--quiet"]) == 0
    data = load_csv(out / "dataset.csv")
    assert len(data) == 40 and data.X.shape == (40, 10)


def test_ingest_companies_only(tmp_path):
    comp = tmp_path / "companies.csv"
    _write_companies(comp, n_tickers=3, n_weeks=5)
    assert main(["ingest", "--companies", str(comp), "--out", str(tmp_path), "--quiet"]) == 0
    rows = _rows(tmp_path / "company_averages.csv")
    assert len(rows) == 5 and rows[0]["n_tickers"] == "3"


def test_ingest_malformed_names_row(tmp_path, write_index, capsys):
    path = write_index(["2017-01-02,1,2,3,4,5,6,7,8,9,10,1000", "2017-01-09,1,2,3,4,5,6,7,8,9,oops,1001"])
    code = main(["ingest", "--input", str(path), "--out", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "row 2" in err and "x10_gdp" in err


def test_fit_outputs(fitted):
    for name in ("model.json", "trace.json", "diagnostics.json", "screening.json",
                 "qq_residuals.csv", "residual_vs_fitted.csv"):
        assert (fitted / name).is_file()
    doc = json.loads((fitted / "model.json").read_text())
    assert doc["schema_version"] == 1 and doc["kind"] == "model"
    assert doc["model"]["meta"]["split"]["n_train"] == 125
    assert _rows(fitted / "qq_residuals.csv")[0].keys() == {"theoretical", "sample"}


def test_fit_byte_identical(index_csv, tmp_path):
    args = ["fit", "--input", str(index_csv), "--out", str(tmp_path), "--quiet"]
    assert main(args) == 0
    first = (tmp_path / "model.json").read_bytes()
    assert main(args) == 0
    assert (tmp_path / "model.json").read_bytes() == first


def test_predict_keeps_order(fitted, tmp_path):
    data, _ = make_dataset(100, seed=8)
    rows = tmp_path / "rows.csv"
    write_csv(data, rows)
    # shuffle file order; predictions must follow it
    lines = rows.read_text().splitlines()
    perm = np.random.default_rng(0).permutation(100)
    rows.write_text("\n".join([lines[0], *(lines[1 + i] for i in perm)]) + "\n")
    out = tmp_path / "p"
    assert main(["predict", "--model", str(fitted / "model.json"), "--rows", str(rows), "--out", str(out), "--quiet"]) == 0
    got = _rows(out / "predictions.csv")
    assert [g["row"] for g in got] == [data.weeks[i].isoformat() for i in perm]


def test_predict_published(tmp_path):
    rows = tmp_path / "z.csv"
    rows.write_text("beta,fcf_per_share,pb_ratio,pe_ratio,peg_ratio,div_yield,interest_rate,ics,psr,gdp\n"
                    "0,0,0,0,0,0,0,0,0,0\n0,0,0,0,0,0,0,0,0,1\n")
    assert main(["predict", "--model", "published", "--rows", str(rows), "--out", str(tmp_path), "--quiet"]) == 0
    got = _rows(tmp_path / "predictions.csv")
    assert float(got[0]["wcp"]) == pytest.approx(1179.0381122573563, abs=1e-9)
    assert float(got[1]["wcp"]) == pytest.approx(1328.4630590365280, abs=1e-9)


def test_validate_published_pairs(tmp_path):
    assert main(["validate", "--pairs", "published", "--out", str(tmp_path), "--quiet"]) == 0
    rep = json.loads((tmp_path / "validation.json").read_text())["validation"]
    assert rep["rmse"] == pytest.approx(21.035005665160476, abs=1e-9)


def test_validate_model(fitted, index_csv, tmp_path):
    args = ["validate", "--model", str(fitted / "model.json"), "--input", str(index_csv),
            "--k", "5", "--repeats", "2", "--out", str(tmp_path), "--quiet"]
    assert main(args) == 0
    rep = json.loads((tmp_path / "validation.json").read_text())["validation"]
    assert rep["n_test"] == 31 and len(rep["per_fold_mse"]) == 10
    assert rep["mspe"] > 0 and rep["msetr"] > 0


def test_rank(fitted, index_csv, tmp_path):
    args = ["rank", "--model", str(fitted / "model.json"), "--input", str(index_csv), "--out", str(tmp_path), "--quiet"]
    assert main(args) == 0
    entries = json.loads((tmp_path / "ranking.json").read_text())["ranking"]["entries"]
    assert sum(e["contribution"] for e in entries) == pytest.approx(100, abs=0.01)
    assert main(["rank", "--model", "published", "--method", "coef_share", "--out", str(tmp_path), "--quiet"]) == 0


def test_diagnose(fitted, index_csv, tmp_path):
    args = ["diagnose", "--model", str(fitted / "model.json"), "--input", str(index_csv), "--out", str(tmp_path), "--quiet"]
    assert main(args) == 0
    doc = json.loads((tmp_path / "diagnostics.json").read_text())
    assert abs(doc["diagnostics"]["mean_residual"]) < 1e-10
    assert (tmp_path / "residual_vs_fitted.csv").is_file()


def test_config_file_and_override(index_csv, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# demo\ninput = {index_csv}\nalpha = 0.01\nseed = 7\nquiet = true\n")
    out = tmp_path / "o"
    assert main(["fit", "--config", str(cfg), "--seed", "9", "--out", str(out)]) == 0
    conf = json.loads((out / "model.json").read_text())["config"]
    assert conf["alpha"] == 0.01 and conf["seed"] == 9


def test_bad_config_value(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha = lots\n")
    assert main(["fit", "--config", str(cfg)]) == 2


def test_env_out_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("SECTORCAST_OUT", str(tmp_path / "env"))
    assert main(["validate", "--pairs", "published", "--quiet"]) == 0
    assert (tmp_path / "env" / "validation.json").is_file()


def test_exit_codes(tmp_path, write_index):
    assert main(["fit", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2
    small = write_index([f"{w.isoformat()},1,2,3,4,5,6,7,8,9,{k},{1000 + k}" for k, w in enumerate(weeks(12))])
    assert main(["fit", "--input", str(small), "--out", str(tmp_path)]) == 2
    data, _ = make_dataset(60, seed=0)
    X = data.X.copy()
    X[:, 7] = 96.0  # constant ICS column
    const = tmp_path / "const.csv"
    write_csv(data.with_indicators(X), const)
    assert main(["fit", "--input", str(const), "--out", str(tmp_path), "--quiet"]) == 3
