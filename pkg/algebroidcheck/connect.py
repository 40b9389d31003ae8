"""Connections on a prolongation as involutive endomorphisms.

A connection is given by Christoffel data ``F(x, e)`` of shape (p, n) and acts on the prolongation fibre
``(a, z)`` as

    N = [[I, 0], [-2F, -I]],   h = (I + N) / 2,   v = (I - N) / 2.

Semi-basic tensors (vertical valued, killing vertical vectors) act on connections by
``N -> N + Y``, which shifts the Christoffel data by ``-Y_za / 2``.
"""

from dataclasses import dataclass

import numpy as np

from algebroidcheck.algebroid import EndoField, Section, nijenhuis
from algebroidcheck.jets import SmoothField, as_array, constant_field, primal
from algebroidcheck.prolong import ModuleSection, Prolongation, context_of, make_projectable
from algebroidcheck.utils import ConsistencyError, ShapeError, ValidationError, max_abs

INVOLUTION_TOLERANCE = 1e-12


def _blocks(top_left, top_right, bottom_left, bottom_right) -> np.ndarray:
    return as_array(np.block([[top_left, top_right], [bottom_left, bottom_right]]))


@dataclass(frozen=True)
class Connection:
    prol: Prolongation
    christoffel: SmoothField

    def involution(self, y) -> np.ndarray:
        n, p = self.prol.n, self.prol.p
        F = self.christoffel(y)
        return _blocks(np.eye(n), np.zeros((n, p)), -2.0 * F, -np.eye(p))

    @property
    def N(self) -> EndoField:
        size = self.prol.n + self.prol.p
        return SmoothField(self.prol.total, self.involution, (size, size))


def make_connection(prol: Prolongation, christoffel: SmoothField, samples: int = 16) -> Connection:
    """Wrap Christoffel data, verifying ``N² = I`` at sampled points."""
    if christoffel.domain != prol.total or christoffel.shape != (prol.p, prol.n):
        raise ShapeError(f"Christoffel data must be a ({prol.p}, {prol.n})-field on the total box")
    conn = Connection(prol, christoffel)
    eye = np.eye(prol.n + prol.p)
    for y in prol.total.samples(samples):
        N = primal(conn.involution(y))
        defect = max_abs(N @ N - eye)
        if defect > INVOLUTION_TOLERANCE:
            raise ConsistencyError(f"Connection is not an involution at {y.tolist()} (defect {defect:.3e})")
    return conn


def projectors(conn: Connection) -> tuple[EndoField, EndoField]:
    """Horizontal and vertical projectors ``h = (I + N)/2`` and ``v = (I - N)/2``."""
    size = conn.prol.n + conn.prol.p
    eye = np.eye(size)
    h = SmoothField(conn.prol.total, lambda y: 0.5 * (eye + conn.involution(y)), (size, size))
    v = SmoothField(conn.prol.total, lambda y: 0.5 * (eye - conn.involution(y)), (size, size))
    return h, v


def horizontal_lift(conn: Connection, a: Section) -> ModuleSection:
    """``(a, -F a)``, the horizontal section over ``a``."""
    prol = conn.prol
    m = prol.alg.base.dim
    z = SmoothField(prol.total, lambda y: -(conn.christoffel(y) @ a(y[:m])), (prol.p,))
    return ModuleSection(prol, [(constant_field(prol.total, 1.0), make_projectable(prol, a, z))])


def splitting(conn: Connection) -> tuple[EndoField, EndoField]:
    """The isomorphism ``(a, z) -> (a, z + F a)`` onto ``A ⊕ V`` and its inverse."""
    prol = conn.prol
    n, p = prol.n, prol.p
    size = n + p

    def forward(y):
        return _blocks(np.eye(n), np.zeros((n, p)), conn.christoffel(y), np.eye(p))

    def inverse(y):
        return _blocks(np.eye(n), np.zeros((n, p)), -conn.christoffel(y), np.eye(p))

    return SmoothField(prol.total, forward, (size, size)), SmoothField(prol.total, inverse, (size, size))


@dataclass(frozen=True)
class SemiBasicTensor:
    prol: Prolongation
    field: EndoField

    def __call__(self, y) -> np.ndarray:
        return self.field(y)


def semi_basic_defect(prol: Prolongation, field: EndoField, y) -> float:
    """How far ``field`` at ``y`` is from killing vertical vectors and taking vertical values."""
    n = prol.n
    value = primal(field(y))
    return max(max_abs(value[:, n:]), max_abs(value[:n, :]))


def semi_basic(prol: Prolongation, field: EndoField, samples: int = 16, tolerance: float = INVOLUTION_TOLERANCE) -> SemiBasicTensor:
    size = prol.n + prol.p
    if field.domain != prol.total or field.shape != (size, size):
        raise ShapeError(f"Semi-basic tensor must be a ({size}, {size})-field on the total box")
    for y in prol.total.samples(samples):
        defect = semi_basic_defect(prol, field, y)
        if defect > tolerance:
            raise ValidationError(f"Tensor is not semi-basic at {y.tolist()} (defect {defect:.3e})")
    return SemiBasicTensor(prol, field)


def semi_basic_difference(first: Connection, second: Connection, samples: int = 16) -> SemiBasicTensor:
    """``N2 - N1``, which is semi-basic for connections on the same prolongation."""
    if first.prol != second.prol:
        raise ValidationError("Connections live on different prolongations")
    prol = first.prol
    size = prol.n + prol.p
    field = SmoothField(prol.total, lambda y: second.involution(y) - first.involution(y), (size, size))
    for y in prol.total.samples(samples):
        defect = semi_basic_defect(prol, field, y)
        if defect > INVOLUTION_TOLERANCE:
            raise ConsistencyError(f"Difference of connections is not semi-basic at {y.tolist()}")
    return SemiBasicTensor(prol, field)


def apply_semi_basic(conn: Connection, tensor: SemiBasicTensor) -> Connection:
    """The connection ``N + Y``."""
    if tensor.prol != conn.prol:
        raise ValidationError("Tensor and connection live on different prolongations")
    n = conn.prol.n
    tensor = semi_basic(conn.prol, tensor.field)
    shifted = SmoothField(
        conn.prol.total,
        lambda y: conn.christoffel(y) - 0.5 * tensor(y)[n:, :n],
        conn.christoffel.shape,
    )
    return make_connection(conn.prol, shifted)


def from_linear_connection(prol: Prolongation, gamma: SmoothField) -> Connection:
    """Connection induced by linear Christoffel symbols ``Gamma`` of shape (p, m, p) on the base:
    ``F(x, e) a = Gamma_x(rho_x a, e)``."""
    m, p = prol.alg.base.dim, prol.p
    if gamma.domain != prol.alg.base or gamma.shape != (p, m, p):
        raise ShapeError(f"Linear Christoffel symbols must be a ({p}, {m}, {p})-field on the base box")

    def christoffel(y):
        x, e = y[:m], y[m:]
        return (gamma(x) @ e) @ prol.alg.anchor(x)

    return make_connection(prol, SmoothField(prol.total, christoffel, (p, prol.n)))


def connection_endo(conn: Connection) -> EndoField:
    """The involution as an endomorphism field of the prolongation."""
    return conn.N


def torsion(conn: Connection, X: SmoothField, Y: SmoothField, at) -> np.ndarray:
    """Nijenhuis torsion of the connection's involution on two prolongation sections."""
    return nijenhuis(context_of(conn.prol), connection_endo(conn), X, Y, at, variant="paper")
