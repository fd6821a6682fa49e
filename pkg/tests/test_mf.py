import numpy as np
import pytest

from conftest import random_poly
from orbijac import mf as mf_module
from orbijac.errors import InvarianceError, MatrixFactorizationError
from orbijac.jacobian import jacobian_ring
from orbijac.mf import (
    MatrixFactorization,
    build_kernel_stack,
    contraction_matrix,
    diagonal_kernel,
    equivariant_modify,
    koszul_complex,
    koszul_mf,
    mfabc_check,
    sector_complex,
    sector_generator_sign,
    subsets,
    wedge_matrix,
)
from orbijac.poly import DiagonalGroup, GroupElement, MultiPoly, VarSet, diff_quotient
from orbijac.t2 import chi

M = 12


def test_subset_basis_and_sign_matrices():
    assert subsets(2) == [(), (0,), (1,), (0, 1)]
    # θ₂ ∧ θ₁ = -θ₁θ₂
    assert wedge_matrix(2, 1)[3, 1] == -1
    assert wedge_matrix(2, 0)[3, 2] == 1
    assert contraction_matrix(2, 1)[1, 3] == -1
    for i in range(3):
        w, c = wedge_matrix(3, i), contraction_matrix(3, i)
        assert not (w @ w).any()
        assert ((w @ c + c @ w) == np.eye(8, dtype=int)).all()


def test_rank_one_koszul_factorization():
    vs = VarSet.standard(1)
    x = MultiPoly.variable(vs, M, 0)
    mf = koszul_mf([x], [x])
    assert mf.diff[0, 1] == x and mf.diff[1, 0] == x
    assert mf.diff[0, 0].is_zero() and mf.diff[1, 1].is_zero()
    assert mf.potential == x * x
    mf = koszul_mf([x * x], [x])
    assert mf.check()["ok"]


def test_verify_reports_first_bad_entry():
    vs = VarSet.standard(1)
    x = MultiPoly.variable(vs, M, 0)
    zero = MultiPoly.zero(vs, M)
    diff = np.array([[zero, x], [x, zero]], dtype=object)
    mf = MatrixFactorization(1, vs, M, diff, x)
    assert not mf.check()["squares_ok"]
    with pytest.raises(MatrixFactorizationError) as err:
        mf.verify()
    assert err.value.entry == (0, 0)


def test_parity():
    vs = VarSet.standard(1)
    x = MultiPoly.variable(vs, M, 0)
    zero = MultiPoly.zero(vs, M)
    assert koszul_mf([x], [x]).parity_ok()
    diff = np.array([[x, zero], [zero, x]], dtype=object)
    assert not MatrixFactorization(1, vs, M, diff, x * x).parity_ok()


def test_length_mismatch():
    vs = VarSet.standard(2)
    x = MultiPoly.variable(vs, M, 0)
    with pytest.raises(ValueError):
        koszul_mf([x, x], [x])


def test_koszul_complex_squares_to_zero():
    vs = VarSet.standard(3)
    x1, x2, x3 = (MultiPoly.variable(vs, M, i) for i in range(3))
    W = x1 ** 3 + x2 ** 3 + x3 ** 3 + x1 * x2 * x3
    mf = koszul_complex(W)
    assert mf.check()["ok"]
    jr = jacobian_ring(W)
    for entry in mf.diff.flat:
        assert jr.normal_form(entry).is_zero()


def test_diagonal_kernel_for_random_potentials(rng):
    vs = VarSet.standard(3)
    for _ in range(20):
        W = random_poly(rng, vs, M, max_degree=5, terms=5)
        report = diagonal_kernel(W).check()
        assert report["ok"], report


def test_diagonal_kernel_of_zero_potential():
    vs = VarSet.standard(2)
    mf = diagonal_kernel(MultiPoly.zero(vs, M))
    assert mf.potential.is_zero()
    assert mf.check()["ok"]


def test_diagonal_kernel_uses_tail_quotients():
    vs = VarSet.standard(2)
    x1, x2 = (MultiPoly.variable(vs, M, i) for i in range(2))
    W = x1 * x2
    mf = diagonal_kernel(W)
    assert mf.a == tuple(diff_quotient(W, j, convention="tail") for j in range(2))


def test_equivariant_modify_on_trivial_group():
    vs = VarSet.standard(2)
    x1, x2 = (MultiPoly.variable(vs, M, i) for i in range(2))
    kernel = diagonal_kernel(x1 ** 3 + x2 ** 4)
    trivial = DiagonalGroup.generate([GroupElement(M, (0, 0))])
    emf = equivariant_modify(kernel, trivial)
    for r in range(4):
        for c in range(4):
            assert emf.base.diff[r, c] == kernel.diff[r, c]


def test_equivariant_modify_rejects_non_invariant_potential():
    vs = VarSet.standard(2)
    x1, x2 = (MultiPoly.variable(vs, M, i) for i in range(2))
    kernel = diagonal_kernel(x1 ** 3 + x1 * x2)
    group = DiagonalGroup.generate([GroupElement(M, (4, 4))])
    with pytest.raises(InvarianceError):
        equivariant_modify(kernel, group)


def test_t2_kernel_stack(t2_alg):
    kernel = diagonal_kernel(t2_alg.W)
    assert kernel.check()["ok"]
    emf = equivariant_modify(kernel, t2_alg.group)
    assert emf.check()["ok"]
    stack = build_kernel_stack(emf)
    assert len(stack.summands) == 3
    for row in stack.check():
        assert row["squares_ok"] and row["equivariance_ok"], row
    assert stack.composition_ok()
    g = chi(t2_alg.group)
    assert stack.target(g, g, t2_alg.group.identity) == t2_alg.group.identity


def test_sector_complexes(t2_alg):
    g = chi(t2_alg.group)
    assert sector_generator_sign(g) == -1
    for h in (t2_alg.group.identity, g, g * g):
        res = sector_complex(t2_alg.W, h).check()
        assert res["ok"], res


def test_sector_complex_rejects_non_invariant_element():
    vs = VarSet.standard(2)
    x1, x2 = (MultiPoly.variable(vs, M, i) for i in range(2))
    with pytest.raises(InvarianceError):
        sector_complex(x1 ** 3 + x1 * x2, GroupElement(M, (4, 4)))


def test_mfabc_template(t2_alg):
    W = t2_alg.W
    f = [diff_quotient(W, i, convention="tail") for i in range(3)]
    report = mfabc_check(W, f)
    assert report["ok"], report
    assert report["relations_ok"]
    assert report["c_sign"] == -1
    assert not report["alternative_ok"]


def test_mfabc_detects_bad_input(t2_alg):
    W = t2_alg.W
    f = [diff_quotient(W, i, convention="tail") for i in range(3)]
    ring = f[0].varset
    f[0] = f[0] + MultiPoly.variable(ring, M, 0)
    report = mfabc_check(W, f)
    assert not report["precondition_ok"]
    assert not report["ok"]


def test_mfabc_single_variable_potential():
    vs = VarSet.standard(3)
    W = MultiPoly.variable(vs, M, 0) ** 2
    ring = vs.with_copies(2)
    zero = MultiPoly.zero(ring, M)
    f = [MultiPoly.variable(ring, M, 0, copy=1) + MultiPoly.variable(ring, M, 0), zero, zero]
    report = mfabc_check(W, f)
    assert report["ok"]
    assert not report["alternative_ok"]


@pytest.fixture
def fermat4_stack():
    vs = VarSet.standard(2)
    x, y = (MultiPoly.variable(vs, 4, i) for i in range(2))
    group = DiagonalGroup.generate([GroupElement(4, (1, 3))])
    return build_kernel_stack(equivariant_modify(diagonal_kernel(x ** 4 + y ** 4), group))


def test_kernel_stack_actions_compose(fermat4_stack):
    assert fermat4_stack.composition_failures() == []
    g = fermat4_stack.group.generators[0]
    one = fermat4_stack.group.identity
    for h, summand in fermat4_stack.summands.items():
        twice = fermat4_stack.transport(fermat4_stack.transport(summand.diff, g, one), one, g)
        direct = fermat4_stack.transport(summand.diff, g, g)
        assert all(a == b for a, b in zip(twice.flat, direct.flat))


def test_non_multiplicative_weights_break_composition(monkeypatch, fermat4_stack):
    generators = set(fermat4_stack.group.generators)
    real = mf_module.rho

    def only_on_generators(h, n):
        return real(h, n) if h in generators else real(h * h.inverse(), n)

    monkeypatch.setattr(mf_module, "rho", only_on_generators)
    failures = fermat4_stack.composition_failures()
    assert failures
    assert not fermat4_stack.composition_ok()
    assert any(f["first"] == ["0,0", "1,3"] and f["second"] == ["0,0", "1,3"] for f in failures)
