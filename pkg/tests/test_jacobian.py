import pytest

from conftest import random_poly

from orbijac.errors import InvarianceError, NonIsolatedSingularityError, PrecisionError
from orbijac.jacobian import (
    EXACT,
    SERIES,
    buchberger,
    jacobian_ring,
    leading_monomial,
    milnor_number,
    normal_form,
    restrict_to_fixed,
)
from orbijac.poly import GroupElement, MultiPoly, VarSet, partial_derivative
from orbijac.scalar import QSeries
from orbijac.t2 import build_W_t2, imaginary_unit, series

M = 12


def variables(n):
    vs = VarSet.standard(n)
    return vs, [MultiPoly.variable(vs, M, i) for i in range(n)]


def test_fermat_milnor_numbers():
    vs, (x, y) = variables(2)
    assert milnor_number(jacobian_ring(x ** 4 + y ** 4)) == 9
    vs, (x, y, z) = variables(3)
    jr = jacobian_ring(x ** 3 + y ** 3 + z ** 3)
    assert milnor_number(jr) == 8
    assert jr.gb.field_mode == EXACT
    assert jr.basis[0] == (0, 0, 0)
    assert jr.basis[-1] == (1, 1, 1)


def test_orders_agree_on_dimension():
    vs, (x, y, z) = variables(3)
    W = x ** 3 + y ** 3 + z ** 3 + x * y * z
    assert milnor_number(jacobian_ring(W, "lex")) == milnor_number(jacobian_ring(W, "grevlex")) == 8


def test_reduced_basis_is_monic_and_reduces_ideal():
    vs, (x, y, z) = variables(3)
    W = x ** 3 + y ** 3 + z ** 3 + x * y * z
    gb = buchberger([partial_derivative(W, i) for i in range(3)])
    for g in gb.generators:
        assert g.terms[leading_monomial(g, gb.order)] == 1
    for i in range(3):
        assert normal_form(partial_derivative(W, i) * (x + z * z), gb).is_zero()


def test_morse_point():
    vs, (x,) = variables(1)
    jr = jacobian_ring(x ** 2)
    assert jr.basis == ((0,),)
    assert jr.normal_form(x + 3) == 3


def test_no_variables_left():
    W = MultiPoly.zero(VarSet(()), M)
    jr = jacobian_ring(W)
    assert jr.basis == ((),)


def test_empty_generators_rejected():
    vs, _ = variables(2)
    with pytest.raises(ValueError):
        buchberger([MultiPoly.zero(vs, M)])


def test_non_isolated_singularity():
    vs, (x, y) = variables(2)
    jr = jacobian_ring(x * x * y, degree_cap=10)
    with pytest.raises(NonIsolatedSingularityError):
        jr.basis


def test_insufficient_precision_is_reported():
    vs, (x, y) = variables(2)
    c = QSeries(M, {1: 1}, 4)
    W = x ** 3 + y ** 3 + (x * y).scale(c)
    with pytest.raises(PrecisionError):
        jacobian_ring(W)
    jr = jacobian_ring(W, min_relative_precision=2)
    assert jr.gb.field_mode == SERIES


def test_restrict_to_fixed():
    vs, (x, y) = variables(2)
    h = GroupElement(M, (0, 6))
    W = x ** 3 + y ** 2
    assert restrict_to_fixed(W, h) == MultiPoly.monomial(VarSet(("x1",)), M, (3,))
    with pytest.raises(InvarianceError):
        restrict_to_fixed(x ** 3 + x * y, GroupElement(M, (4, 4)))


def test_t2_jacobian_ring(t2_alg):
    jr = t2_alg.sectors[t2_alg.group.identity].jac
    assert milnor_number(jr) == 8
    assert jr.gb.field_mode == SERIES
    degrees = sorted(sum(e) for e in jr.basis)
    assert degrees == [0, 1, 1, 1, 2, 2, 2, 3]


def test_t2_cubic_relation(t2_alg):
    jr = t2_alg.sectors[t2_alg.group.identity].jac
    vs = jr.varset
    N = int(t2_alg.W.precision())
    i = imaginary_unit(M)
    phi, psi = series("phi", N), series("psi", N)
    x1 = MultiPoly.monomial(vs, M, (3, 0, 0))
    x123 = MultiPoly.monomial(vs, M, (1, 1, 1))
    assert jr.normal_form(x1.scale(phi * i * 3)) == jr.normal_form(x123.scale(psi * i))


def test_normal_form_is_idempotent(rng, t2_alg):
    vs, (x, y, z) = variables(3)
    fermat = jacobian_ring(x ** 3 + y ** 3 + z ** 3 + x * y * z)
    t2 = t2_alg.sectors[t2_alg.group.identity].jac
    for jr in (fermat, t2):
        for _ in range(10):
            p = random_poly(rng, jr.varset, M, max_degree=5, terms=5)
            once = jr.normal_form(p)
            assert jr.normal_form(once) == once
            assert all(e in jr.basis for e in once.terms)


def test_t2_normal_forms_are_stable_in_precision():
    short, long = jacobian_ring(build_W_t2(60)), jacobian_ring(build_W_t2(150))
    assert short.basis == long.basis
    vs = short.varset
    for exps in [(3, 0, 0), (0, 2, 1), (1, 1, 1), (2, 2, 0), (4, 0, 0), (1, 2, 1)]:
        p = MultiPoly.monomial(vs, M, exps)
        a, b = short.normal_form(p), long.normal_form(p)
        assert a == b
