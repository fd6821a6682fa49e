import pytest

from conftest import FULL_PRECISION
from orbijac.mf import check_invariant
from orbijac.poly import MultiPoly
from orbijac.scalar import CycNum, QSeries
from orbijac.t2 import (
    M,
    T2Class,
    T2Cohomology,
    build_W_t2,
    chi,
    cube_root,
    cyclotomic_identity_check,
    imaginary_unit,
    ks_assignment,
    ks_point,
    modular_identity_check,
    run_report,
    series,
    t2_act,
    t2_cup,
    t2_group,
    verify_ring_hom,
)

N = 60


@pytest.fixture(scope="module")
def ks(t2_alg):
    return ks_assignment(algebra=t2_alg)


def test_series_leading_terms():
    i = imaginary_unit()
    assert series("phi", 100) == QSeries(M, {9: -1, 81: 3}, 100)
    assert series("psi", 50) == QSeries(M, {1: -1, 25: -5, 49: 7}, 50)
    assert series("gamma", 50) == QSeries(M, {1: -i, 25: i, 49: i}, 50)
    assert series("gamma", 50, gamma_sign=-1) == -series("gamma", 50)


def test_series_are_stable_in_precision():
    for name in ("phi", "psi", "gamma"):
        short, long = series(name, 80), series(name, 300)
        assert short.prec == 80
        assert short == long
        assert long.truncate(80).coeffs == short.coeffs


def test_series_argument_errors():
    with pytest.raises(ValueError):
        series("eta", 10)
    with pytest.raises(ValueError):
        series("phi", 0)
    with pytest.raises(ValueError):
        series("gamma", 10, gamma_sign=2)


def test_modular_identity():
    report = modular_identity_check(N)
    assert report["ok"], report
    assert report["first_failure"] is None
    assert report["precision"] >= N
    eight = CycNum.from_rational(M, 8).to_json()
    assert report["leading_lhs"] == {"exp": 12, "cyc": eight}
    assert report["leading_rhs"] == {"exp": 12, "cyc": eight}
    assert modular_identity_check(N, gamma_sign=-1)["ok"]


def test_modular_identity_detects_wrong_gamma():
    gamma = series("gamma", N) + QSeries.monomial(M, 1, 30, N)
    report = modular_identity_check(N, gamma=gamma)
    assert not report["ok"]
    assert 12 < report["first_failure"] < N
    with pytest.raises(ValueError):
        modular_identity_check(10)


def test_cyclotomic_identity():
    assert cyclotomic_identity_check()["ok"]
    w = cube_root()
    assert (1 + w) / ((1 - w) * 3) == ((1 - w) ** 3).inverse()


def test_potential():
    with pytest.raises(ValueError):
        build_W_t2(20)
    W = build_W_t2(N)
    check_invariant(W, t2_group())
    i = imaginary_unit()
    assert W.coefficient((0, 3, 0)) == -(series("phi", N) * i)
    assert W.coefficient((1, 1, 1)) == series("psi", N) * i
    assert len(W.terms) == 4


def test_cup_product_and_action():
    ch, cv, pt = (T2Class.basis(k) for k in ("C_h", "C_v", "pt"))
    assert t2_cup(ch, cv) == pt
    assert t2_cup(cv, ch) == -pt
    assert t2_cup(ch, ch) == T2Class(M)
    assert t2_cup(pt, ch) == T2Class(M)
    assert t2_act(ch) == cv
    assert t2_act(t2_act(t2_act(cv))) == cv


def test_eigenclasses():
    coh = T2Cohomology(M, series("gamma", N))
    w = cube_root()
    assert t2_act(coh.l_chi()) == coh.l_chi().scale(w)
    assert t2_act(coh.l_chi2()) == coh.l_chi2().scale(w * w)


def test_ks_images(t2_alg, ks):
    g = chi(t2_alg.group)
    assert ks(T2Class.basis("1")) == t2_alg.unit()
    assert ks(ks.cohomology.l_chi()) == t2_alg.element(g)
    assert ks(ks.cohomology.l_chi2()) == t2_alg.element(g * g)
    point = ks_point(t2_alg)
    assert not point.is_zero()
    assert {sum(e) for e in point.terms} == {3}


def test_ks_is_a_ring_homomorphism(ks):
    report = verify_ring_hom(ks=ks)
    assert report["ok"], report["failures"]
    assert len(report["pairs"]) == 36
    assert all(report["eigenvectors"].values())


def test_dg_sign_breaks_the_homomorphism(ks):
    report = verify_ring_hom(algebra_sign="dg", ks=ks)
    assert not report["ok"]
    assert {"a": "l_chi", "b": "l_chi2", "ok": False} in report["failures"]
    with pytest.raises(ValueError):
        verify_ring_hom(algebra_sign="other", ks=ks)


def test_full_report():
    report = run_report(N)
    assert report["failures"] == []
    assert report["ok"]
    names = [c["name"] for c in report["checks"]]
    assert "sigma_chi_chi2_closed_form" in names
    assert "ring_homomorphism" in names


def test_ks_point_leading_term(t2_alg):
    jr = t2_alg.sectors[t2_alg.group.identity].jac
    vs = jr.varset
    i = imaginary_unit()
    phi, psi = series("phi", N), series("psi", N)
    coeff = (phi * psi.q_d_dq() - psi * phi.q_d_dq()) / phi * i / 24
    x123 = MultiPoly.monomial(vs, M, (1, 1, 1))
    assert coeff.valuation == 1
    assert coeff.leading() == i / 3
    assert ks_point(t2_alg) == jr.normal_form(x123.scale(coeff))


@pytest.mark.slow
def test_modular_identity_at_full_precision():
    report = modular_identity_check(FULL_PRECISION)
    assert report["ok"], report
    assert report["precision"] >= FULL_PRECISION


@pytest.mark.slow
def test_full_report_at_full_precision():
    report = run_report(FULL_PRECISION)
    assert report["failures"] == []
    assert report["ok"]
    names = [c["name"] for c in report["checks"] if c["ok"]]
    assert "sigma_chi_chi2_closed_form" in names
    assert "ring_homomorphism" in names
