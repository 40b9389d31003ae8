from pathlib import Path

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

try:
    from algebroidcheck.algebroid import (
        BUILTINS,
        anchor_morphism_defect,
        anchored,
        antisymmetry_defect,
        bracket,
        builtin,
        constant_section,
        identity_morphism,
        jacobiator,
        jet_dependence_defect,
        kernel_diagnostics,
        leibniz_defect,
        lie_derivative_endo,
        lie_morphism_defect,
        linear_image,
        linear_morphism,
        make_algebroid,
        make_lie_algebra_bundle,
        make_tangent,
        nijenhuis,
        non_jacobi_constants,
        section,
        transport,
        vector_field_bracket,
        zero_section,
    )
    from algebroidcheck.jets import Box, SmoothField, constant_field, primal
    from algebroidcheck.polynomial import random_polynomial
    from algebroidcheck.utils import DomainError, ShapeError, ValidationError
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck.algebroid import (
        BUILTINS,
        anchor_morphism_defect,
        anchored,
        antisymmetry_defect,
        bracket,
        builtin,
        constant_section,
        identity_morphism,
        jacobiator,
        jet_dependence_defect,
        kernel_diagnostics,
        leibniz_defect,
        lie_derivative_endo,
        lie_morphism_defect,
        linear_image,
        linear_morphism,
        make_algebroid,
        make_lie_algebra_bundle,
        make_tangent,
        nijenhuis,
        non_jacobi_constants,
        section,
        transport,
        vector_field_bracket,
        zero_section,
    )
    from algebroidcheck.jets import Box, SmoothField, constant_field, primal
    from algebroidcheck.polynomial import random_polynomial
    from algebroidcheck.utils import DomainError, ShapeError, ValidationError

E = np.eye(3)
POINT = np.array([0.3, -0.2])


def test_tangent_anchor_is_identity(tangent):
    np.testing.assert_array_equal(tangent.anchor(POINT), np.eye(2))


def test_tangent_bracket_is_the_vector_field_commutator(tangent):
    a1 = section(tangent.base, lambda x: np.array([x[1], 0.0], dtype=object), 2)
    a2 = section(tangent.base, lambda x: np.array([0.0, x[0]], dtype=object), 2)
    np.testing.assert_allclose(primal(bracket(tangent, a1, a2)(POINT)), [-0.3, -0.2])


def test_anchored_vector_fields(rank_drop):
    X = anchored(rank_drop, constant_section(rank_drop.base, [1.0, 1.0]))
    np.testing.assert_array_equal(primal(X(POINT)), [1.0, 0.3])
    Y = SmoothField(rank_drop.base, lambda x: np.array([x[1], 0.0], dtype=object), (2,))
    np.testing.assert_allclose(primal(vector_field_bracket(X, Y)(POINT)), [0.3, 0.2])
    with pytest.raises(ShapeError):
        vector_field_bracket(X, SmoothField(rank_drop.base, lambda x: x[0], ()))


def test_so3_bracket_is_the_cross_product(so3):
    e1, e2 = constant_section(so3.base, E[0]), constant_section(so3.base, E[1])
    np.testing.assert_array_equal(primal(bracket(so3, e1, e2)(POINT)), E[2])


def test_structure_must_be_antisymmetric():
    c = np.zeros((2, 2, 2))
    c[0, 0, 1] = 1.0
    with pytest.raises(ValidationError):
        make_lie_algebra_bundle(Box.cube(1), c)


def test_shapes_are_checked():
    base = Box.cube(2)
    with pytest.raises(ShapeError):
        make_algebroid(base, 2, constant_field(base, np.eye(3)), constant_field(base, np.zeros((2, 2, 2))))
    with pytest.raises(ShapeError):
        make_algebroid(base, 2, constant_field(base, np.eye(2)), constant_field(base, np.zeros((2, 2))))


def test_bracket_rejects_a_section_on_another_box(tangent):
    other = constant_section(Box.cube(2, 0.0, 1.0), np.ones(2))
    with pytest.raises(ShapeError):
        bracket(tangent, other, other)


def test_leibniz_examples(tangent, so3, rng):
    e1, e2 = constant_section(tangent.base, np.eye(2)[0]), constant_section(tangent.base, np.eye(2)[1])
    x1 = SmoothField(tangent.base, lambda x: x[0], ())
    assert np.max(np.abs(leibniz_defect(tangent, e1, e2, x1, POINT))) <= 1e-10
    a, b = random_polynomial(rng, so3.base, (3,)), random_polynomial(rng, so3.base, (3,))
    f = random_polynomial(rng, so3.base, ())
    np.testing.assert_allclose(leibniz_defect(so3, a, b, f, POINT), np.zeros(3), atol=1e-13)
    c = constant_field(so3.base, 2.5)
    np.testing.assert_allclose(leibniz_defect(so3, a, b, c, POINT), np.zeros(3), atol=1e-13)


def test_jet_dependence(tangent, rng):
    e1 = constant_section(tangent.base, np.eye(2)[0])
    assert jet_dependence_defect(tangent, e1, POINT, np.array([0.0, 1.0])) <= 1e-10
    assert jet_dependence_defect(tangent, zero_section(tangent.base, 2), POINT) <= 1e-10
    a = random_polynomial(rng, tangent.base, (2,))
    assert jet_dependence_defect(tangent, a, POINT) <= 1e-9


def test_jacobiator(tangent, so3, non_jacobi, rng):
    a, b, c = (random_polynomial(rng, tangent.base, (2,)) for _ in range(3))
    assert np.max(np.abs(jacobiator(tangent, a, b, c, POINT))) <= 1e-9
    basis = [constant_section(so3.base, e) for e in E]
    np.testing.assert_allclose(jacobiator(so3, *basis, POINT), np.zeros(3), atol=1e-15)
    basis = [constant_section(non_jacobi.base, e) for e in E]
    for x in non_jacobi.base.samples(4):
        np.testing.assert_allclose(jacobiator(non_jacobi, *basis, x), E[0])


def test_non_jacobi_constants_are_antisymmetric():
    c = non_jacobi_constants()
    np.testing.assert_array_equal(c, -c.transpose(0, 2, 1))


def test_anchor_morphism(tangent, so3, rank_drop, rng):
    a, b = random_polynomial(rng, tangent.base, (2,)), random_polynomial(rng, tangent.base, (2,))
    assert np.max(np.abs(anchor_morphism_defect(tangent, a, b, POINT))) <= 1e-10
    a, b = random_polynomial(rng, so3.base, (3,)), random_polynomial(rng, so3.base, (3,))
    np.testing.assert_array_equal(anchor_morphism_defect(so3, a, b, POINT), np.zeros(2))
    # zero structure with a point-dependent anchor is not a Lie algebroid
    e1 = constant_section(rank_drop.base, np.eye(2)[0])
    e2 = constant_section(rank_drop.base, np.eye(2)[1])
    np.testing.assert_allclose(anchor_morphism_defect(rank_drop, e1, e2, POINT), [0.0, -1.0])


def test_kernel_diagnostics(tangent, so3, rank_drop):
    k = kernel_diagnostics(tangent, POINT)
    assert (k.rank, k.nullity, k.image_dim) == (2, 0, 2)
    k = kernel_diagnostics(so3, POINT)
    assert (k.rank, k.nullity) == (0, 3)
    k = kernel_diagnostics(rank_drop, np.array([0.0, 0.5]))
    assert (k.rank, k.nullity) == (1, 1)
    assert kernel_diagnostics(rank_drop, np.array([0.5, 0.5])).rank == 2


def test_lie_derivative_of_endomorphisms(tangent, rng):
    identity = constant_field(tangent.base, np.eye(2))
    a, b = random_polynomial(rng, tangent.base, (2,)), random_polynomial(rng, tangent.base, (2,))
    np.testing.assert_allclose(lie_derivative_endo(tangent, identity, a, b, POINT), np.zeros(2), atol=1e-14)
    line = make_tangent(Box.cube(1))
    d = constant_section(line.base, np.ones(1))
    scaled = SmoothField(line.base, lambda x: x[0] * np.eye(1), (1, 1))
    np.testing.assert_allclose(lie_derivative_endo(line, scaled, d, d, np.array([0.4])), [1.0])


def test_nijenhuis(tangent, rng):
    identity = constant_field(tangent.base, np.eye(2))
    a, b = random_polynomial(rng, tangent.base, (2,)), random_polynomial(rng, tangent.base, (2,))
    np.testing.assert_allclose(nijenhuis(tangent, identity, a, b, POINT, variant="general"), np.zeros(2), atol=1e-14)

    J = constant_field(tangent.base, np.array([[0.0, -1.0], [1.0, 0.0]]))
    e1 = constant_section(tangent.base, np.eye(2)[0])
    e2 = constant_section(tangent.base, np.eye(2)[1])
    for variant in ("minus", "general"):
        np.testing.assert_array_equal(nijenhuis(tangent, J, e1, e2, POINT, variant=variant), np.zeros(2))

    line = make_tangent(Box.cube(1))
    d = constant_section(line.base, np.ones(1))
    x_d = section(line.base, lambda x: np.array([x[0]], dtype=object), 1)
    one = constant_field(line.base, np.eye(1))
    np.testing.assert_allclose(nijenhuis(line, one, d, x_d, np.array([0.2])), [-2.0])
    np.testing.assert_allclose(nijenhuis(line, one, d, x_d, np.array([0.2]), variant="paper"), [-2.0])
    np.testing.assert_allclose(nijenhuis(line, one, d, x_d, np.array([0.2]), variant="general"), [0.0])

    with pytest.raises(ValueError) as e:
        nijenhuis(tangent, J, e1, e2, POINT, variant="classical")
    assert str(e.value) == "Parameter variant is classical but must be one of minus, general, paper"


def test_nijenhuis_variant_alias(tangent, rng):
    A = random_polynomial(rng, tangent.base, (2, 2), degree=1)
    a, b = random_polynomial(rng, tangent.base, (2,)), random_polynomial(rng, tangent.base, (2,))
    np.testing.assert_array_equal(
        nijenhuis(tangent, A, a, b, POINT, variant="paper"), nijenhuis(tangent, A, a, b, POINT, variant="minus")
    )


def test_identity_is_a_lie_morphism(tangent, rng):
    a, b = random_polynomial(rng, tangent.base, (2,)), random_polynomial(rng, tangent.base, (2,))
    defect = lie_morphism_defect(tangent, tangent, identity_morphism(tangent), (a, a), (b, b), POINT)
    assert defect.max() == 0.0


def test_linear_isomorphism_of_tangent_bundles(tangent, rng):
    T = np.array([[2.0, 1.0], [0.0, 1.0]])
    Ti = np.linalg.inv(T)
    target = make_tangent(Box.cube(2, -4.0, 4.0))
    morphism = linear_morphism(tangent.base, target.base, T, T)
    a, b = random_polynomial(rng, tangent.base, (2,)), random_polynomial(rng, tangent.base, (2,))
    pushed_a = section(target.base, lambda y: T @ a(Ti @ y), 2)
    pushed_b = section(target.base, lambda y: T @ b(Ti @ y), 2)
    defect = lie_morphism_defect(tangent, target, morphism, (a, pushed_a), (b, pushed_b), POINT)
    assert defect.max() <= 1e-9


def test_transport_is_a_lie_morphism(so3, rotation, non_jacobi, rng):
    T = np.array([[1.2, 0.3], [-0.1, 0.9]])
    for alg in (so3, rotation, non_jacobi):
        n = alg.fiber_dim
        S = np.eye(n) + 0.2 * np.tril(np.ones((n, n)), -1)
        moved = transport(alg, T, S)
        assert moved.target.claims_jacobi == alg.claims_jacobi
        assert moved.morphism.target == moved.target.base
        a, b = random_polynomial(rng, alg.base, (n,)), random_polynomial(rng, alg.base, (n,))
        pairs = (a, moved.push(a)), (b, moved.push(b))
        assert lie_morphism_defect(alg, moved.target, moved.morphism, *pairs, POINT).max() <= 1e-9


def test_transported_tangent_bundle(tangent):
    T = np.array([[2.0, 1.0], [0.0, 1.0]])
    assert linear_image(tangent.base, T).bounds == [[-3.0, 3.0], [-1.0, 1.0]]
    moved = transport(tangent, T, T)
    assert moved.target.base.bounds == [[-3.0, 3.0], [-1.0, 1.0]]
    np.testing.assert_allclose(primal(moved.target.anchor(np.array([1.0, 0.5]))), np.eye(2), atol=1e-14)
    np.testing.assert_array_equal(primal(moved.target.structure(np.array([1.0, 0.5]))), np.zeros((2, 2, 2)))

    with pytest.raises(ValidationError):
        transport(tangent, np.array([[1.0, 2.0], [0.5, 1.0]]), np.eye(2))
    with pytest.raises(ShapeError):
        transport(tangent, np.eye(3), np.eye(2))
    with pytest.raises(ShapeError):
        transport(tangent, T, T, base=Box.cube(3))



def test_mismatched_pairs_are_reported_not_raised(tangent, so3):
    zero = linear_morphism(tangent.base, so3.base, np.eye(2), np.zeros((3, 2)))
    a = constant_section(tangent.base, np.ones(2))
    b = constant_section(so3.base, E[0])
    defect = lie_morphism_defect(tangent, so3, zero, (a, b), (a, b), POINT)
    assert defect.related_max == 1.0


def test_morphism_leaving_the_target_box(tangent):
    shifted = linear_morphism(tangent.base, tangent.base, np.eye(2), np.eye(2), offset=[1.5, 0.0])
    a = constant_section(tangent.base, np.ones(2))
    with pytest.raises(DomainError):
        lie_morphism_defect(tangent, tangent, shifted, (a, a), (a, a), POINT)
    with pytest.raises(DomainError):
        shifted.check_range()


def test_builtins():
    assert set(BUILTINS) >= {"tangent", "lie-algebra:so3", "rank-drop", "non-jacobi", "action:rotation", "action:sine"}
    sine = builtin("action:sine")
    np.testing.assert_allclose(primal(sine.anchor(np.array([0.5, 0.0]))), [[1.0], [np.sin(0.5)]])
    assert builtin("tangent", Box.cube(3)).fiber_dim == 3
    with pytest.raises(ValueError):
        builtin("hyperbolic")


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from(["tangent", "lie-algebra:so3", "action:rotation"]))
def test_bracket_is_antisymmetric(seed, name):
    alg = builtin(name)
    rng = np.random.default_rng(seed)
    a = random_polynomial(rng, alg.base, (alg.fiber_dim,))
    b = random_polynomial(rng, alg.base, (alg.fiber_dim,))
    assert np.max(np.abs(antisymmetry_defect(alg, a, b, POINT))) <= 1e-12
