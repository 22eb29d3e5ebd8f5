import json
from pathlib import Path

import numpy as np
import pytest

from sectorcast.synthetic import make_dataset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def golden():
    return json.loads((FIXTURES / "normality_golden.json").read_text())["fixtures"]


@pytest.fixture(scope="session")
def synthetic():
    data, t_true = make_dataset(156, seed=1)
    return data, t_true


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


INDEX_HEADER = "week_start,beta,fcf_per_share,pb_ratio,pe_ratio,peg_ratio,div_yield,interest_rate,ics,psr,gdp,wcp"


@pytest.fixture
def write_index(tmp_path):
    def _write(lines, header=INDEX_HEADER, name="index.csv"):
        path = tmp_path / name
        path.write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")
        return path

    return _write


_ACCEPTANCE = []


@pytest.fixture
def criterion(capsys):
    """Record a numbered pass/fail line; the lines are echoed in the terminal summary."""

    def _check(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] #{number:>2} {title}" + (f": {detail}" if detail else "")
        _ACCEPTANCE.append((number, line))
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return _check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
