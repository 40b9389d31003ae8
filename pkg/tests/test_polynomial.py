from pathlib import Path

import numpy as np
import pytest

try:
    from algebroidcheck.jets import Box, directional, primal
    from algebroidcheck.polynomial import Monomial, decode_poly, poly_field, random_polynomial
    from algebroidcheck.utils import ConfigError
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck.jets import Box, directional, primal
    from algebroidcheck.polynomial import Monomial, decode_poly, poly_field, random_polynomial
    from algebroidcheck.utils import ConfigError

PLANE = Box.cube(2)


def test_decode_and_evaluate():
    raw = [
        {"coeff": 2.0, "powers": [1, 0], "outIndex": [0]},
        {"coeff": -1.0, "powers": [0, 2], "outIndex": [0]},
        {"coeff": 3.0, "powers": [0, 0], "outIndex": 1},
    ]
    field = decode_poly(PLANE, (2,), raw, "anchor")
    np.testing.assert_allclose(field(np.array([0.5, 0.5])), [0.75, 3.0])
    np.testing.assert_allclose(primal(directional(field, np.array([0.5, 0.5]), np.array([0.0, 1.0]))), [-1.0, 0.0])
    assert field.constant is None


def test_paired_terms_are_antisymmetric():
    raw = [{"coeff": 1.5, "powers": [1, 1], "outPair": [2, 0, 1]}]
    c = decode_poly(PLANE, (3, 3, 3), raw, "structure")(np.array([0.5, -0.5]))
    assert c[2, 0, 1] == pytest.approx(-0.375)
    assert c[2, 1, 0] == pytest.approx(0.375)
    np.testing.assert_array_equal(c + c.transpose(0, 2, 1), np.zeros((3, 3, 3)))


def test_constant_polynomial_is_marked_constant():
    field = poly_field(PLANE, (2,), [Monomial(4.0, (0, 0), (1,))])
    np.testing.assert_array_equal(field.constant, [0.0, 4.0])


def test_empty_term_list_is_zero():
    field = decode_poly(PLANE, (2, 3), [], "anchor")
    np.testing.assert_array_equal(field(np.zeros(2)), np.zeros((2, 3)))


@pytest.mark.parametrize(
    "raw, message",
    [
        ({"coeff": 1.0}, "expected a list"),
        ([{"coeff": "one", "outIndex": [0]}], "x[0].coeff"),
        ([{"coeff": 1.0, "powers": [1], "outIndex": [0]}], "x[0].powers"),
        ([{"coeff": 1.0, "powers": [1, -1], "outIndex": [0]}], "x[0].powers"),
        ([{"coeff": 1.0, "outIndex": [0], "outPair": [0, 1]}], "exactly one of"),
        ([{"coeff": 1.0, "outIndex": [5]}], "must lie in [0, 2)"),
        ([{"coeff": 1.0, "outPair": [1]}], "needs at least two output axes"),
    ],
)
def test_decode_errors_name_their_location(raw, message):
    with pytest.raises(ConfigError) as e:
        decode_poly(PLANE, (2,), raw, "x")
    assert message in str(e.value)


def test_paired_indices_must_differ():
    with pytest.raises(ConfigError):
        decode_poly(PLANE, (2, 2, 2), [{"coeff": 1.0, "outPair": [0, 1, 1]}], "structure")


def test_random_polynomial_is_reproducible():
    a = random_polynomial(np.random.default_rng(3), PLANE, (2,))
    b = random_polynomial(np.random.default_rng(3), PLANE, (2,))
    x = np.array([0.3, -0.7])
    np.testing.assert_array_equal(a(x), b(x))
    # quadratic, so the third derivative along any line vanishes
    h = 1e-2
    v = np.array([1.0, 0.5])
    third = a(x + 2 * h * v) - 3 * a(x + h * v) + 3 * a(x) - a(x - h * v)
    np.testing.assert_allclose(third, np.zeros(2), atol=1e-12)
