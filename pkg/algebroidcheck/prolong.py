"""Prolongation of a local algebroid over a fibration.

Over a fibration ``(x, e)`` with fibre dimension ``p``, the prolongation is itself a local algebroid on the
total box with fibre coordinates ``(a, z)``, anchor ``diag(rho, I)`` and structure ``C`` in the top-left
block. Projectable sections ``(a(x), z(x, e))`` bracket by

    [(a, z), (a', z')] = ([a, a'], dz'(rho a, z) - dz(rho a', z'))

and general sections, finite sums ``sum f_i X_i`` with projectable ``X_i``, bracket by extending that
formula with the Leibniz rule. :func:`as_module_section` decomposes any section over the canonical basis
so nested brackets stay inside the module form.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from algebroidcheck.algebroid import (
    KERNEL_CUTOFF,
    BracketContext,
    BundleMorphism,
    LocalAlgebroid,
    Section,
    anchored,
    bracket,
    constant_section,
    matrix_rank,
    vector_field_bracket,
    zero_section,
)
from algebroidcheck.jets import Box, SmoothField, as_array, constant_field, directional, jacobian, primal
from algebroidcheck.utils import DomainError, ShapeError, ValidationError, max_abs

FIBER_INDEPENDENCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Fibration:
    base: Box
    fiber: Box

    @property
    def total(self) -> Box:
        return self.base.product(self.fiber)

    def split(self, y):
        m = self.base.dim
        return y[:m], y[m:]


@dataclass(frozen=True)
class Prolongation:
    alg: LocalAlgebroid
    fib: Fibration
    derived: LocalAlgebroid

    @property
    def n(self) -> int:
        return self.alg.fiber_dim

    @property
    def p(self) -> int:
        return self.fib.fiber.dim

    @property
    def total(self) -> Box:
        return self.fib.total


def build_prolongation(alg: LocalAlgebroid, fib: Fibration) -> Prolongation:
    if fib.base != alg.base:
        raise ValidationError(f"Fibration base {fib.base.bounds} differs from the algebroid base {alg.base.bounds}")
    m, n, p = alg.base.dim, alg.fiber_dim, fib.fiber.dim
    total = fib.total

    def anchor(y):
        out = np.full((m + p, n + p), 0.0, dtype=object)
        out[:m, :n] = alg.anchor(y[:m])
        for i in range(p):
            out[m + i, n + i] = 1.0
        return out

    def structure(y):
        out = np.full((n + p,) * 3, 0.0, dtype=object)
        out[:n, :n, :n] = alg.structure(y[:m])
        return out

    derived = LocalAlgebroid(
        total,
        n + p,
        SmoothField(total, anchor, (m + p, n + p)),
        SmoothField(total, structure, (n + p,) * 3),
        alg.claims_jacobi,
        f"prolongation of {alg.name}" if alg.name else "prolongation",
    )
    return Prolongation(alg, fib, derived)


def tangent_prolongation(alg: LocalAlgebroid, fiber: Box | None = None) -> Prolongation:
    """Prolongation over the fibre ``R^n`` of the algebroid itself, a box on ``fiber`` or the unit cube."""
    return build_prolongation(alg, Fibration(alg.base, fiber or Box.cube(alg.fiber_dim)))


def membership_defect(prol: Prolongation, at, a, tangent) -> np.ndarray:
    """``v - rho_x(a)`` for a candidate element ``(a, (v, z))`` at the point ``at`` of the total box."""
    at = as_array(at)
    if at.shape != (prol.total.dim,):
        raise ShapeError(f"Point has shape {at.shape}, expected ({prol.total.dim},)")
    if not prol.total.interior(at):
        raise DomainError(f"Point {primal(at).tolist()} is not interior to {prol.total.bounds}")
    a = as_array(a)
    v, z = as_array(tangent[0]), as_array(tangent[1])
    if a.shape != (prol.n,) or v.shape != (prol.alg.base.dim,) or z.shape != (prol.p,):
        raise ShapeError("Element components do not match the prolongation's dimensions")
    return primal(v - prol.alg.anchor(at[: prol.alg.base.dim]) @ a)


class ProjectableSection(SmoothField):
    """``(a(x), z(x, e))`` with ``a`` a section of the algebroid over the base."""

    def __init__(self, prol: Prolongation, a: Section, z: SmoothField):
        m = prol.alg.base.dim
        self.a = a
        self.z = z
        constant = None
        if a.constant is not None and z.constant is not None:
            constant = np.concatenate([as_array(a.constant), as_array(z.constant)])
        super().__init__(
            prol.total,
            lambda y: np.concatenate([as_array(a(y[:m])), as_array(z(y))]),
            (prol.n + prol.p,),
            constant,
        )


def make_projectable(prol: Prolongation, a: Section, z: SmoothField, samples: int = 16) -> ProjectableSection:
    """Build a projectable section, accepting ``a`` on the base box or on the total box.

    A total-box ``a`` is checked not to depend on the fibre coordinates at sampled points."""
    m, p = prol.alg.base.dim, prol.p
    if z.domain != prol.total or z.shape != (p,):
        raise ShapeError(f"Fibre component must be a ({p},)-field on the total box")
    if a.shape != (prol.n,):
        raise ShapeError(f"Algebroid component has shape {a.shape}, expected ({prol.n},)")
    if a.domain == prol.alg.base:
        return ProjectableSection(prol, a, z)
    if a.domain != prol.total:
        raise ShapeError("Algebroid component must live on the base box or the total box")
    eye = np.eye(m + p)
    for y in prol.total.samples(samples):
        for j in range(m, m + p):
            drift = max_abs(primal(directional(a, y, eye[j])))
            if drift > FIBER_INDEPENDENCE_TOLERANCE:
                raise ValidationError(
                    f"Section depends on fibre coordinate {j - m} at {y.tolist()} (derivative {drift:.3e})"
                )
    anchor_point = prol.fib.fiber.center
    on_base = SmoothField(
        prol.alg.base, lambda x: a(np.concatenate([as_array(x), anchor_point.astype(object)])), (prol.n,), a.constant
    )
    return ProjectableSection(prol, on_base, z)


def vertical_lift(prol: Prolongation, z: SmoothField) -> ProjectableSection:
    """``(0, z)``."""
    return make_projectable(prol, zero_section(prol.alg.base, prol.n), z)


def basis_section(prol: Prolongation, k: int) -> ProjectableSection:
    """The constant canonical section ``(e_k, 0)`` for ``k < n`` or ``(0, e_{k-n})`` otherwise."""
    n, p = prol.n, prol.p
    if k < n:
        return make_projectable(prol, constant_section(prol.alg.base, np.eye(n)[k]), constant_field(prol.total, np.zeros(p)))
    return vertical_lift(prol, constant_field(prol.total, np.eye(p)[k - n]))


class ModuleSection(SmoothField):
    """A finite sum ``sum f_i X_i`` of projectable sections with scalar coefficients on the total box."""

    def __init__(self, prol: Prolongation, terms):
        terms = tuple(terms)
        if not terms:
            raise ValidationError("A module section needs at least one term")
        for f, X in terms:
            if f.shape != () or f.domain != prol.total:
                raise ShapeError("Module coefficients must be scalar fields on the total box")
            if not isinstance(X, ProjectableSection):
                raise ValidationError("Module terms must be projectable sections")
        self.terms = terms

        def fn(y):
            total = 0.0
            for f, X in terms:
                total = total + f(y) * X(y)
            return total

        super().__init__(prol.total, fn, (prol.n + prol.p,))


def _one(prol: Prolongation) -> SmoothField:
    return constant_field(prol.total, 1.0)


def as_module_section(prol: Prolongation, X: SmoothField) -> ModuleSection:
    """Module form of any section: projectables get coefficient 1, anything else is expanded over the
    canonical basis with its components as coefficients."""
    if isinstance(X, ModuleSection):
        return X
    if isinstance(X, ProjectableSection):
        return ModuleSection(prol, [(_one(prol), X)])
    if X.domain != prol.total or X.shape != (prol.n + prol.p,):
        raise ShapeError(f"Section of shape {X.shape} is not a section of the prolongation")
    return ModuleSection(prol, [(X.component(k), basis_section(prol, k)) for k in range(prol.n + prol.p)])


def projectable_bracket(prol: Prolongation, X: ProjectableSection, Y: ProjectableSection) -> ProjectableSection:
    a = bracket(prol.alg, X.a, Y.a)
    rho_hat = prol.derived.anchor

    def z(y):
        out = np.full(prol.p, 0.0, dtype=object)
        if Y.z.constant is None:
            out = out + directional(Y.z, y, rho_hat(y) @ X(y))
        if X.z.constant is None:
            out = out - directional(X.z, y, rho_hat(y) @ Y(y))
        return out

    return ProjectableSection(prol, a, SmoothField(prol.total, z, (prol.p,)))


def _lie(prol: Prolongation, X: ProjectableSection, f: SmoothField) -> SmoothField:
    rho_hat = prol.derived.anchor
    return SmoothField(prol.total, lambda y: directional(f, y, rho_hat(y) @ X(y)), ())


def prolong_bracket(prol: Prolongation, X: SmoothField, Y: SmoothField) -> ModuleSection:
    """Bracket of general prolongation sections via
    ``[f X, g Y] = f g [X, Y] + f (rho_hat(X) g) Y - g (rho_hat(Y) f) X``."""
    X, Y = as_module_section(prol, X), as_module_section(prol, Y)
    terms = []
    for f, A in X.terms:
        for g, B in Y.terms:
            terms.append((f * g, projectable_bracket(prol, A, B)))
            if g.constant is None:
                terms.append((f * _lie(prol, A, g), B))
            if f.constant is None:
                terms.append((-(g * _lie(prol, B, f)), A))
    return ModuleSection(prol, terms)


def context_of(prol: Prolongation) -> BracketContext:
    """The prolongation as an anchor and a bracket, for the generic defect operations."""
    return BracketContext(
        prol.total,
        prol.n + prol.p,
        prol.derived.anchor,
        lambda X, Y: prolong_bracket(prol, X, Y),
        prol.alg.claims_jacobi,
    )


def hat_anchor_morphism_defect(prol: Prolongation, X: SmoothField, Y: SmoothField, at) -> np.ndarray:
    """``rho_hat[X, Y] - [rho_hat X, rho_hat Y]`` at ``at``."""
    lhs = prol.derived.anchor(at) @ prolong_bracket(prol, X, Y)(at)
    rhs = vector_field_bracket(anchored(prol.derived, X), anchored(prol.derived, Y))(at)
    return primal(lhs - rhs)


@dataclass(frozen=True)
class VerticalDefect:
    difference: np.ndarray
    base_component: np.ndarray

    def max(self) -> float:
        return max(max_abs(self.difference), max_abs(self.base_component))


def _check_vertical(prol: Prolongation, Z: SmoothField, samples: int) -> None:
    n = prol.n
    for y in prol.total.samples(samples):
        drift = max_abs(primal(Z(y)[:n]))
        if drift > FIBER_INDEPENDENCE_TOLERANCE:
            raise ValidationError(f"Section is not vertical at {y.tolist()} (algebroid component {drift:.3e})")


def vertical_independence_defect(prol: Prolongation, Z: SmoothField, W: SmoothField, at, samples: int = 8) -> VerticalDefect:
    """For vertical sections: the algebroid component of ``[Z, W]`` and the change of ``[Z, W]`` when the
    structure field is replaced by zero."""
    _check_vertical(prol, Z, samples)
    _check_vertical(prol, W, samples)
    value = prolong_bracket(prol, Z, W)(at)
    alg = prol.alg
    flat_alg = replace(alg, structure=constant_field(alg.base, np.zeros((alg.fiber_dim,) * 3)))
    flat = build_prolongation(flat_alg, prol.fib)
    flat_value = prolong_bracket(flat, Z, W)(at)
    return VerticalDefect(primal(value - flat_value), primal(value[: prol.n]))


@dataclass(frozen=True)
class KernelIdentity:
    hat_nullity: int
    base_nullity: int
    fiber_dim: int
    projection_nullity: int

    @property
    def holds(self) -> bool:
        return (
            self.hat_nullity == self.base_nullity
            and self.hat_nullity + self.projection_nullity == self.base_nullity + self.fiber_dim
        )


def kernel_identity(prol: Prolongation, at, cutoff: float = KERNEL_CUTOFF) -> KernelIdentity:
    """Nullities of ``rho_hat`` and ``rho`` at a point, with the fibre-dimension balance through the
    projection onto the algebroid component.

    The prolongation fibre at ``(x, e)`` is taken as the null space of ``[rho_x, -I, 0]`` on triples
    ``(a, v, z)``, and the projection's nullity is measured on that basis."""
    m = prol.alg.base.dim
    rho = np.asarray(primal(prol.alg.anchor(as_array(at)[:m])), dtype=float)
    hat_rank, _ = matrix_rank(prol.derived.anchor(at), cutoff)
    base_rank, _ = matrix_rank(rho, cutoff)
    fibre = scipy.linalg.null_space(np.hstack([rho, -np.eye(m), np.zeros((m, prol.p))]), rcond=cutoff)
    proj_rank, _ = matrix_rank(fibre[: prol.n, :], cutoff)
    return KernelIdentity(
        hat_nullity=prol.n + prol.p - hat_rank,
        base_nullity=prol.n - base_rank,
        fiber_dim=prol.p,
        projection_nullity=fibre.shape[1] - proj_rank,
    )


@dataclass(frozen=True)
class LiftedMorphism:
    morphism: BundleMorphism
    anchor_defect: float


def prolong_morphism(
    source: Prolongation, target: Prolongation, phi: BundleMorphism, total_map: SmoothField, samples: int = 16
) -> LiftedMorphism:
    """Lift a morphism of algebroids covered by a map of total boxes to the prolongations.

    The lifted fibre map at ``(x, e)`` sends ``(a, z)`` to ``(Phi_x a, DPsi_fibre (rho_x a, z))``. The
    covering condition ``Psi(x, e)_base = psi(x)`` is checked at sampled points."""
    mA, mB = source.alg.base.dim, target.alg.base.dim
    nA, nB, pA, pB = source.n, target.n, source.p, target.p
    if total_map.domain != source.total or total_map.shape != (mB + pB,):
        raise ShapeError(f"Total map must send the source total box into R^{mB + pB}")
    if phi.source != source.alg.base or phi.target != target.alg.base or phi.fiber_map.shape != (nB, nA):
        raise ShapeError("Algebroid morphism does not match the two prolongations")
    for y in source.total.samples(samples):
        drift = max_abs(primal(total_map(y)[:mB]) - primal(phi.base_map(y[:mA])))
        if drift > 1e-10:
            raise ValidationError(f"Total map does not cover the base map at {y.tolist()} (defect {drift:.3e})")

    def fiber_map(y):
        x = y[:mA]
        d = jacobian(total_map, y)[mB:, :]
        out = np.full((nB + pB, nA + pA), 0.0, dtype=object)
        out[:nB, :nA] = phi.fiber_map(x)
        out[nB:, :nA] = d[:, :mA] @ source.alg.anchor(x)
        out[nB:, nA:] = d[:, mA:]
        return out

    lifted = BundleMorphism(total_map, SmoothField(source.total, fiber_map, (nB + pB, nA + pA)), target.total)
    worst = 0.0
    for y in source.total.samples(samples):
        image = total_map(y)
        lm1 = target.derived.anchor(image) @ lifted.fiber_map(y) - jacobian(total_map, y) @ source.derived.anchor(y)
        worst = max(worst, max_abs(primal(lm1)))
    if worst > 1e-8:
        logging.warning(f"Lifted morphism is not anchored: defect {worst:.3e}")
    return LiftedMorphism(lifted, worst)
