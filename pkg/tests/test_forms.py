from pathlib import Path

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

try:
    from algebroidcheck.algebroid import (
        as_context,
        constant_section,
        identity_morphism,
        linear_morphism,
        make_tangent,
        section,
        zero_section,
    )
    from algebroidcheck.forms import (
        KForm,
        cartan_defect,
        coefficients,
        d_rho_fn,
        exterior_derivative,
        form_from_coefficients,
        function_form,
        insert,
        lam_defect,
        lie_commutation_defect,
        lie_derivative_form,
        pullback_form,
        wedge,
        zero_form,
    )
    from algebroidcheck.jets import Box, SmoothField, constant_field, primal
    from algebroidcheck.polynomial import random_polynomial
    from algebroidcheck.utils import ShapeError
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck.algebroid import (
        as_context,
        constant_section,
        identity_morphism,
        linear_morphism,
        make_tangent,
        section,
        zero_section,
    )
    from algebroidcheck.forms import (
        KForm,
        cartan_defect,
        coefficients,
        d_rho_fn,
        exterior_derivative,
        form_from_coefficients,
        function_form,
        insert,
        lam_defect,
        lie_commutation_defect,
        lie_derivative_form,
        pullback_form,
        wedge,
        zero_form,
    )
    from algebroidcheck.jets import Box, SmoothField, constant_field, primal
    from algebroidcheck.polynomial import random_polynomial
    from algebroidcheck.utils import ShapeError

POINT = np.array([0.3, -0.2])
E2 = np.eye(2)
E3 = np.eye(3)


def dx(base: Box, n: int, k: int) -> KForm:
    return form_from_coefficients(constant_field(base, np.eye(n)[k]), n, 1)


def test_wedge_uses_the_determinant_convention(tangent):
    area = wedge(dx(tangent.base, 2, 0), dx(tangent.base, 2, 1))
    assert area(POINT, E2[0], E2[1]) == 1.0
    assert area(POINT, E2[1], E2[0]) == -1.0
    assert area(POINT, E2[0], E2[0]) == 0.0


def test_wedge_is_associative_on_a_basis():
    space = Box.cube(3)
    d1, d2, d3 = (dx(space, 3, k) for k in range(3))
    x = np.zeros(3)
    assert wedge(wedge(d1, d2), d3)(x, *E3) == 1.0
    assert wedge(d1, wedge(d2, d3))(x, *E3) == 1.0
    assert wedge(wedge(d1, d2), d3)(x, E3[1], E3[0], E3[2]) == -1.0


def test_wedge_with_a_function_scales(tangent):
    f = SmoothField(tangent.base, lambda x: x[0] + 2.0, ())
    omega = dx(tangent.base, 2, 1)
    v = np.array([0.5, -1.5])
    assert wedge(function_form(f, 2), omega)(POINT, v) == pytest.approx(2.3 * -1.5)


def test_insertion(tangent):
    area = wedge(dx(tangent.base, 2, 0), dx(tangent.base, 2, 1))
    e1 = constant_section(tangent.base, E2[0])
    v = np.array([0.7, -0.4])
    assert insert(e1, area)(POINT, v) == -0.4
    f = function_form(SmoothField(tangent.base, lambda x: x[0], ()), 2)
    assert insert(e1, f)(POINT) == 0.0
    a = section(tangent.base, lambda x: np.array([x[0], 1.0], dtype=object), 2)
    assert primal(insert(a, dx(tangent.base, 2, 0))(POINT)) == pytest.approx(0.3)


def test_form_arguments_are_checked(tangent):
    omega = dx(tangent.base, 2, 0)
    with pytest.raises(ShapeError):
        omega(POINT, E2[0], E2[1])
    with pytest.raises(ShapeError):
        omega(POINT, np.ones(3))
    with pytest.raises(ShapeError):
        wedge(omega, dx(Box.cube(3), 3, 0))


def test_coefficients_round_trip():
    space = Box.cube(3)
    c = np.array([1.0, -2.0, 0.5])
    two = form_from_coefficients(constant_field(space, c), 3, 2)
    np.testing.assert_allclose(coefficients(two, np.zeros(3)), c)
    assert two(np.zeros(3), E3[2], E3[0]) == pytest.approx(2.0)


def test_d_rho_of_functions(tangent, so3):
    f = SmoothField(tangent.base, lambda x: x[0] * x[1], ())
    df = d_rho_fn(tangent, f)
    assert primal(df(POINT, E2[0])) == pytest.approx(-0.2)
    assert primal(df(POINT, E2[1])) == pytest.approx(0.3)
    g = SmoothField(so3.base, lambda x: x[0] ** 2, ())
    assert primal(d_rho_fn(so3, g)(POINT, E3[0])) == 0.0
    c = constant_field(tangent.base, 4.0)
    assert primal(exterior_derivative(tangent, function_form(c, 2))(POINT, E2[0])) == 0.0


def test_lie_derivative(tangent, so3):
    a = section(tangent.base, lambda x: np.array([x[1], 0.0], dtype=object), 2)
    omega = dx(tangent.base, 2, 0)
    assert primal(lie_derivative_form(tangent, a, omega)(POINT, E2[1])) == pytest.approx(1.0)
    assert primal(lie_derivative_form(tangent, a, omega)(POINT, E2[0])) == pytest.approx(0.0)
    zero = zero_section(tangent.base, 2)
    assert primal(lie_derivative_form(tangent, zero, omega)(POINT, E2[1])) == 0.0
    # zero anchor: only the structure term survives, -omega(C(e3, e2)) = -omega(-e1)
    e3 = constant_section(so3.base, E3[2])
    assert primal(lie_derivative_form(so3, e3, dx(so3.base, 3, 0))(POINT, E3[1])) == pytest.approx(1.0)


def test_exterior_derivative_on_the_tangent_algebroid(tangent):
    omega = form_from_coefficients(SmoothField(tangent.base, lambda x: np.array([x[1], 0.0], dtype=object), (2,)), 2, 1)
    d_omega = exterior_derivative(tangent, omega)
    for x in tangent.base.samples(5):
        assert primal(d_omega(x, E2[0], E2[1])) == pytest.approx(-1.0)
    constant = exterior_derivative(tangent, dx(tangent.base, 2, 1))
    assert primal(constant(POINT, E2[0], E2[1])) == 0.0
    f = function_form(SmoothField(tangent.base, lambda x: x[0] * x[1], ()), 2)
    ddf = exterior_derivative(tangent, exterior_derivative(tangent, f))
    assert abs(primal(ddf(POINT, E2[0], E2[1]))) <= 1e-9


def test_d_squared_vanishes_on_so3(so3, rng):
    ctx = as_context(so3)
    omega = form_from_coefficients(random_polynomial(rng, so3.base, (3,)), 3, 1)
    dd = exterior_derivative(ctx, exterior_derivative(ctx, omega))
    assert abs(primal(dd(POINT, *E3))) <= 1e-8


def test_wedge_leibniz(rng):
    space = make_tangent(Box.cube(3))
    eta = form_from_coefficients(random_polynomial(rng, space.base, (3,)), 3, 1)
    zeta = form_from_coefficients(random_polynomial(rng, space.base, (3,)), 3, 1)
    lhs = exterior_derivative(space, wedge(eta, zeta))
    rhs = wedge(exterior_derivative(space, eta), zeta) - wedge(eta, exterior_derivative(space, zeta))
    x = np.array([0.1, -0.3, 0.2])
    u, v, w = rng.uniform(-1, 1, (3, 3))
    assert primal(lhs(x, u, v, w)) == pytest.approx(primal(rhs(x, u, v, w)), abs=1e-8)


def test_pullback(tangent, rng):
    omega = form_from_coefficients(random_polynomial(rng, tangent.base, (2,)), 2, 1)
    v = np.array([0.2, 0.9])
    assert pullback_form(identity_morphism(tangent), omega)(POINT, v) == omega(POINT, v)
    zero = linear_morphism(tangent.base, tangent.base, np.eye(2), np.zeros((2, 2)))
    assert pullback_form(zero, omega)(POINT, v) == 0.0
    T = np.array([[1.0, 2.0], [0.0, 1.0]])
    target = make_tangent(Box.cube(2, -4.0, 4.0))
    xi = np.array([3.0, -1.0])
    constant = form_from_coefficients(constant_field(target.base, xi), 2, 1)
    pulled = pullback_form(linear_morphism(tangent.base, target.base, T, T), constant)
    assert pulled(POINT, v) == pytest.approx(xi @ T @ v)


def test_pullback_commutes_with_d(tangent, rng):
    f = random_polynomial(rng, tangent.base, ())
    omega = form_from_coefficients(random_polynomial(rng, tangent.base, (2,)), 2, 1)
    assert lam_defect(tangent, tangent, identity_morphism(tangent), f, omega, POINT).max() <= 1e-14

    T = np.array([[1.0, 0.5], [-0.5, 1.0]])
    target = make_tangent(Box.cube(2, -3.0, 3.0))
    g = random_polynomial(rng, target.base, ())
    eta = form_from_coefficients(random_polynomial(rng, target.base, (2,)), 2, 1)
    iso = linear_morphism(tangent.base, target.base, T, T)
    assert lam_defect(tangent, target, iso, g, eta, POINT).max() <= 1e-9

    # doubling the fibre map breaks anchor compatibility
    doubled = linear_morphism(tangent.base, tangent.base, np.eye(2), 2.0 * np.eye(2))
    x1 = SmoothField(tangent.base, lambda x: x[0], ())
    defect = lam_defect(tangent, tangent, doubled, x1, omega, POINT)
    assert np.max(np.abs(defect.functions)) == pytest.approx(1.0)


def test_cartan_and_commutation(tangent, so3, rng):
    for alg in (tangent, so3):
        n = alg.fiber_dim
        a = random_polynomial(rng, alg.base, (n,))
        omega = form_from_coefficients(random_polynomial(rng, alg.base, (n,)), n, 1)
        f = random_polynomial(rng, alg.base, ())
        v = rng.uniform(-1, 1, n)
        assert cartan_defect(alg, a, omega, POINT, [v]) <= 1e-8
        assert cartan_defect(alg, a, function_form(f, n), POINT, []) <= 1e-8
        assert lie_commutation_defect(alg, a, f, POINT, v) <= 1e-8


def test_zero_form_is_zero(tangent):
    assert zero_form(tangent.base, 2, 2)(POINT, E2[0], E2[1]) == 0.0


def small_vector(n):
    return st.lists(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=n, max_size=n).map(np.array)


@settings(max_examples=25, deadline=None)
@given(small_vector(3), small_vector(3), small_vector(3), small_vector(3), small_vector(3))
def test_graded_commutativity(c1, c2, u, v, w):
    space = Box.cube(3)
    eta = form_from_coefficients(constant_field(space, c1), 3, 1)
    zeta = form_from_coefficients(constant_field(space, c2), 3, 2)
    x = np.zeros(3)
    # degrees 1 and 2 commute
    assert wedge(eta, zeta)(x, u, v, w) == pytest.approx(wedge(zeta, eta)(x, u, v, w), abs=1e-10)
    assert wedge(eta, eta)(x, u, v) == pytest.approx(0.0, abs=1e-12)
