import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sectorcast.attribute import rank_contributions
from sectorcast.errors import InputError
from sectorcast.refmodel import published_spec
from sectorcast.regress import FittedModel, ModelSpec, TermId, fit_model


def _problem(seed=0, n=120):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, 10))
    y = 0.8 * Z[:, 9] - 0.4 * Z[:, 4] * Z[:, 6] + 0.2 * Z[:, 2] + 0.05 * rng.standard_normal(n)
    return Z, y, ModelSpec.of(["x3", "x5", "x7", "x10", "x5:x7"])


def test_single_term_is_everything():
    Z, y, _ = _problem()
    m = fit_model(Z, y, ModelSpec.of(["x10"]))
    for method in ("partial_ss", "coef_share"):
        r = rank_contributions(m, Z, y, method)
        assert len(r.entries) == 1 and r.entries[0].contribution == pytest.approx(100.0)


def test_orthogonal_equal_betas_split_evenly():
    # +-1 design with orthogonal, equal-norm columns and equal true effects
    n = 16
    Z = np.zeros((n, 10))
    Z[:, 0] = np.tile([1, -1], n // 2)
    Z[:, 1] = np.tile([1, 1, -1, -1], n // 4)
    # the product column is orthogonal to both, so it ends up as pure residual
    y = 0.5 * Z[:, 0] + 0.5 * Z[:, 1] + 0.001 * Z[:, 0] * Z[:, 1]
    m = fit_model(Z, y, ModelSpec.of(["x1", "x2"]))
    assert m.coefficients[0] == pytest.approx(m.coefficients[1], abs=1e-12)
    for method in ("partial_ss", "coef_share"):
        r = rank_contributions(m, Z, y, method)
        assert [e.contribution for e in r.entries] == pytest.approx([50.0, 50.0], abs=1e-9)


def test_rankings_sum_and_order():
    Z, y, spec = _problem()
    m = fit_model(Z, y, spec)
    for method in ("partial_ss", "coef_share"):
        r = rank_contributions(m, Z, y, method)
        c = [e.contribution for e in r.entries]
        assert sum(c) == pytest.approx(100.0, abs=0.01)
        assert c == sorted(c, reverse=True)
        assert [e.rank for e in r.entries] == list(range(1, len(c) + 1))
        assert all(v >= 0 for v in c)
        assert r.entries[0].term == TermId(10)


def test_partial_ss_matches_refit_oracle():
    Z, y, spec = _problem(3)
    m = fit_model(Z, y, spec)
    r = rank_contributions(m, Z, y, "partial_ss")
    base = m.sse
    drops = {t: fit_model(Z, y, spec.without(t)).sse - base for t in spec.terms}
    total = sum(drops.values())
    for e in r.entries:
        assert e.contribution == pytest.approx(100 * drops[e.term] / total, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(1e-3, 1e3))
def test_coef_share_scale_invariant(scale):
    pub = published_spec().as_fitted()
    scaled = FittedModel(pub.spec, pub.intercept, pub.coefficients * scale)
    a = rank_contributions(pub, method="coef_share")
    b = rank_contributions(scaled, method="coef_share")
    assert [e.term for e in a.entries] == [e.term for e in b.entries]
    assert [e.contribution for e in a.entries] == pytest.approx([e.contribution for e in b.entries], rel=1e-9)


def test_published_coef_share_format():
    r = rank_contributions(published_spec().as_fitted(), method="coef_share")
    assert len(r.entries) == 19
    assert r.entries[0].term == TermId(10)
    # |0.6781| / sum |beta| of the 19 published coefficients (2.7661)
    assert r.entries[0].contribution == pytest.approx(100 * 0.6781 / 2.7661, rel=1e-9)
    table = r.table().splitlines()
    assert table[0].split()[0] == "Rank" and "GDP" in table[1]


def test_method_errors():
    Z, y, spec = _problem()
    m = fit_model(Z, y, spec)
    with pytest.raises(InputError):
        rank_contributions(m, method="shapley")
    with pytest.raises(InputError):
        rank_contributions(m, method="partial_ss")
