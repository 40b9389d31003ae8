"""Local Lie algebroids on a chart box.

A local algebroid is an anchor ``rho`` (base dim × fibre dim) and a structure field ``C`` of shape
(n, n, n) with ``C(a, b)_k = sum C[k, i, j] a_i b_j``. Sections bracket by

    [a1, a2](x) = C_x(a1(x), a2(x)) + d a2_x(rho_x a1(x)) - d a1_x(rho_x a2(x))

and everything else here measures how far that bracket is from satisfying the algebroid axioms: Leibniz
rule, jet dependence, Jacobi identity, anchor morphism, endomorphism tensoriality, and Lie-morphism
compatibility between two algebroids.

Operations that only need an anchor and a bracket accept a :class:`BracketContext`, so the same
defects run unchanged over a prolongation's own bracket.
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np
import scipy.linalg
from sympy import LeviCivita

from algebroidcheck.jets import (
    Box,
    SmoothField,
    as_array,
    constant_field,
    directional,
    jacobian,
    primal,
    sin,
)
from algebroidcheck.utils import DomainError, ShapeError, ValidationError, max_abs

Section = SmoothField
EndoField = SmoothField

KERNEL_CUTOFF = 1e-10
ANTISYMMETRY_TOLERANCE = 1e-12


def apply_structure(c, a, b):
    """``C(a, b)`` for a structure value of shape (n, n, n)."""
    return (c @ b) @ a


@dataclass(frozen=True)
class LocalAlgebroid:
    base: Box
    fiber_dim: int
    anchor: SmoothField
    structure: SmoothField
    claims_jacobi: bool = False
    name: str = ""

    def __post_init__(self):
        m, n = self.base.dim, self.fiber_dim
        if self.anchor.domain != self.base or self.structure.domain != self.base:
            raise ShapeError("Anchor and structure fields must live on the algebroid's base box")
        if self.anchor.shape != (m, n):
            raise ShapeError(f"Anchor has shape {self.anchor.shape}, expected {(m, n)}")
        if self.structure.shape != (n, n, n):
            raise ShapeError(f"Structure field has shape {self.structure.shape}, expected {(n, n, n)}")


@dataclass(frozen=True)
class BracketContext:
    """An anchor and a bracket on sections over one box."""

    base: Box
    fiber_dim: int
    anchor: SmoothField
    bracket: Callable[[Section, Section], Section]
    claims_jacobi: bool = False


def as_context(alg) -> BracketContext:
    if isinstance(alg, BracketContext):
        return alg
    return BracketContext(alg.base, alg.fiber_dim, alg.anchor, partial(_local_bracket, alg), alg.claims_jacobi)


def check_antisymmetry(structure: SmoothField, points, tolerance: float = ANTISYMMETRY_TOLERANCE) -> float:
    """Largest ``|C[k, i, j] + C[k, j, i]|`` over ``points``; raises ValidationError above ``tolerance``."""
    worst = 0.0
    for x in points:
        c = primal(structure(x))
        worst = max(worst, max_abs(c + c.transpose(0, 2, 1)))
    if worst > tolerance:
        raise ValidationError(f"Structure field is not antisymmetric: defect {worst:.3e} exceeds {tolerance:.0e}")
    return worst


def make_algebroid(
    base: Box,
    fiber_dim: int,
    anchor: SmoothField,
    structure: SmoothField,
    claims_jacobi: bool = False,
    name: str = "",
    tolerance: float = ANTISYMMETRY_TOLERANCE,
    samples: int = 16,
) -> LocalAlgebroid:
    """Construct a local algebroid, validating antisymmetry of the structure field at sampled points."""
    alg = LocalAlgebroid(base, fiber_dim, anchor, structure, claims_jacobi, name)
    check_antisymmetry(structure, base.samples(samples), tolerance)
    return alg


def section(domain: Box, fn: Callable, fiber_dim: int) -> Section:
    return SmoothField(domain, fn, (fiber_dim,))


def constant_section(domain: Box, vector) -> Section:
    return constant_field(domain, vector)


def zero_section(domain: Box, fiber_dim: int) -> Section:
    return constant_field(domain, np.zeros(fiber_dim))


def _check_section(alg, a: Section, label: str) -> None:
    if a.domain != alg.base or a.shape != (alg.fiber_dim,):
        raise ShapeError(
            f"Section {label} has shape {a.shape} on a {a.domain.dim}-dimensional box; "
            f"expected ({alg.fiber_dim},) on {alg.base.dim} dimensions"
        )


def _local_bracket(alg: LocalAlgebroid, a1: Section, a2: Section) -> Section:
    _check_section(alg, a1, "a1")
    _check_section(alg, a2, "a2")

    def fn(x):
        rho = alg.anchor(x)
        v1, v2 = a1(x), a2(x)
        out = apply_structure(alg.structure(x), v1, v2)
        if a2.constant is None:
            out = out + directional(a2, x, rho @ v1)
        if a1.constant is None:
            out = out - directional(a1, x, rho @ v2)
        return out

    return SmoothField(alg.base, fn, (alg.fiber_dim,))


def bracket(alg, a1: Section, a2: Section) -> Section:
    """The bracket of two sections, as a new section."""
    if isinstance(alg, BracketContext):
        return alg.bracket(a1, a2)
    return _local_bracket(alg, a1, a2)


def anchored(alg, a: Section) -> SmoothField:
    """The vector field ``rho a``."""
    return SmoothField(a.domain, lambda x: alg.anchor(x) @ a(x), (alg.base.dim,))


def vector_field_bracket(X: SmoothField, Y: SmoothField) -> SmoothField:
    """Commutator of vector fields: ``dY(X) - dX(Y)``."""
    if X.domain != Y.domain or X.shape != Y.shape or X.shape != (X.domain.dim,):
        raise ShapeError("Vector fields must be tangent fields on the same box")
    return SmoothField(X.domain, lambda x: directional(Y, x, X(x)) - directional(X, x, Y(x)), X.shape)


def antisymmetry_defect(alg, a1: Section, a2: Section, x) -> np.ndarray:
    b = bracket
    return primal(b(alg, a1, a2)(x) + b(alg, a2, a1)(x))


def leibniz_defect(alg, a1: Section, a2: Section, f: SmoothField, x) -> np.ndarray:
    """``[a1, f a2] - f [a1, a2] - (rho(a1) f) a2`` at ``x``."""
    ctx = as_context(alg)
    if f.shape != () or f.domain != ctx.base:
        raise ShapeError("Leibniz multiplier must be a scalar field on the base box")
    lhs = ctx.bracket(a1, f * a2)(x)
    rho_a1 = ctx.anchor(x) @ a1(x)
    rhs = f(x) * ctx.bracket(a1, a2)(x) + directional(f, x, rho_a1) * a2(x)
    return primal(lhs - rhs)


def jet_dependence_defect(alg, a: Section, x, probe=None) -> float:
    """Change of ``[a, b](x)`` when ``a`` is altered by a term vanishing to second order at ``x``.

    Partners ``b`` are the constant basis sections and the coordinate-linear sections."""
    ctx = as_context(alg)
    x = primal(as_array(x))
    n, m = ctx.fiber_dim, ctx.base.dim
    w = np.ones(n) if probe is None else np.asarray(probe, dtype=float)
    if w.shape != (n,):
        raise ShapeError(f"Probe vector has shape {w.shape}, expected ({n},)")
    bump = SmoothField(ctx.base, lambda y: sum((y[i] - x[i]) ** 2 for i in range(m)) * w, (n,))
    altered = a + bump
    partners = [constant_section(ctx.base, np.eye(n)[k]) for k in range(n)]
    for i in range(m):
        for k in range(n):
            partners.append(section(ctx.base, partial(lambda y, i, k: y[i] * np.eye(n)[k], i=i, k=k), n))
    worst = 0.0
    for b in partners:
        diff = ctx.bracket(altered, b)(x) - ctx.bracket(a, b)(x)
        worst = max(worst, max_abs(primal(diff)))
        diff = ctx.bracket(b, altered)(x) - ctx.bracket(b, a)(x)
        worst = max(worst, max_abs(primal(diff)))
    return worst


def jacobiator(alg, a1: Section, a2: Section, a3: Section, x) -> np.ndarray:
    """Cyclic sum ``[a1, [a2, a3]] + [a2, [a3, a1]] + [a3, [a1, a2]]`` at ``x``."""
    b = as_context(alg).bracket
    total = b(a1, b(a2, a3))(x) + b(a2, b(a3, a1))(x) + b(a3, b(a1, a2))(x)
    return primal(total)


def anchor_morphism_defect(alg, a1: Section, a2: Section, x) -> np.ndarray:
    """``rho[a1, a2] - [rho a1, rho a2]`` at ``x``."""
    ctx = as_context(alg)
    lhs = ctx.anchor(x) @ ctx.bracket(a1, a2)(x)
    rhs = vector_field_bracket(anchored(ctx, a1), anchored(ctx, a2))(x)
    return primal(lhs - rhs)


@dataclass(frozen=True)
class KernelReport:
    rank: int
    nullity: int
    image_dim: int
    condition: float


def matrix_rank(matrix, cutoff: float = KERNEL_CUTOFF) -> tuple[int, np.ndarray]:
    """Numerical rank with singular values below ``cutoff * sigma_max`` discarded."""
    matrix = np.atleast_2d(primal(as_array(matrix)))
    if matrix.size == 0:
        return 0, np.zeros(0)
    s = scipy.linalg.svd(matrix, compute_uv=False)
    top = float(s[0]) if s.size else 0.0
    if top == 0.0:
        return 0, s
    threshold = cutoff * top
    near = [float(v) for v in s if threshold / 1e3 < v < threshold * 1e3]
    if near:
        logging.warning(f"Singular values {near} lie within three orders of magnitude of the rank cutoff {threshold:.3e}")
    return int(np.sum(s > threshold)), s


def kernel_diagnostics(alg, x, cutoff: float = KERNEL_CUTOFF) -> KernelReport:
    """Rank, nullity and image dimension of the anchor at ``x``."""
    rho = primal(alg.anchor(x))
    rank, s = matrix_rank(rho, cutoff)
    condition = float(s[0] / s[rank - 1]) if rank else float("inf")
    return KernelReport(rank=rank, nullity=alg.fiber_dim - rank, image_dim=rank, condition=condition)


def apply_endo(A: EndoField, a: Section) -> Section:
    return SmoothField(a.domain, lambda y: A(y) @ a(y), a.shape)


def lie_derivative_endo(alg, A: EndoField, a: Section, b: Section, x) -> np.ndarray:
    """``(L_a A)(b) = [a, A b] - A [a, b]`` at ``x``."""
    ctx = as_context(alg)
    n = ctx.fiber_dim
    if A.shape != (n, n):
        raise ShapeError(f"Endomorphism field has shape {A.shape}, expected {(n, n)}")
    out = ctx.bracket(a, apply_endo(A, b))(x) - A(x) @ ctx.bracket(a, b)(x)
    return primal(out)


NIJENHUIS_VARIANTS = ("minus", "general")
NIJENHUIS_ALIASES = {"paper": "minus"}


def nijenhuis(alg, A: EndoField, a: Section, b: Section, x, variant: str = "minus") -> np.ndarray:
    """Nijenhuis torsion of ``A`` on ``(a, b)`` at ``x``.

    The ``minus`` variant (also accepted as ``paper``) ends with ``-[a, b]`` and is function-linear only
    where ``A² = -I``; ``general`` ends with ``+A²[a, b]`` and is tensorial for every ``A``."""
    variant = NIJENHUIS_ALIASES.get(variant, variant)
    if variant not in NIJENHUIS_VARIANTS:
        known = ", ".join(NIJENHUIS_VARIANTS + tuple(NIJENHUIS_ALIASES))
        raise ValueError(f"Parameter variant is {variant} but must be one of {known}")
    ctx = as_context(alg)
    n = ctx.fiber_dim
    if A.shape != (n, n):
        raise ShapeError(f"Endomorphism field has shape {A.shape}, expected {(n, n)}")
    b_ = ctx.bracket
    Aa, Ab = apply_endo(A, a), apply_endo(A, b)
    Ax = A(x)
    out = b_(Aa, Ab)(x) - Ax @ b_(Aa, b)(x) - Ax @ b_(a, Ab)(x)
    if variant == "minus":
        out = out - b_(a, b)(x)
    else:
        out = out + Ax @ (Ax @ b_(a, b)(x))
    return primal(out)


@dataclass(frozen=True)
class BundleMorphism:
    """A base map ``psi`` between chart boxes and a fibre map ``Phi_x`` over it."""

    base_map: SmoothField
    fiber_map: SmoothField
    target: Box

    def __post_init__(self):
        if self.base_map.domain != self.fiber_map.domain:
            raise ShapeError("Base map and fibre map must share a source box")
        if self.base_map.shape != (self.target.dim,):
            raise ShapeError(f"Base map has shape {self.base_map.shape}, expected ({self.target.dim},)")
        if len(self.fiber_map.shape) != 2:
            raise ShapeError(f"Fibre map must be matrix valued, got shape {self.fiber_map.shape}")

    @property
    def source(self) -> Box:
        return self.base_map.domain

    def check_range(self, count: int = 64, seed: int = 0) -> None:
        for p in self.source.samples(count, seed):
            if not self.target.contains(self.base_map(p)):
                raise DomainError(f"Base map sends {p.tolist()} outside the target box {self.target.bounds}")


def identity_morphism(alg: LocalAlgebroid) -> BundleMorphism:
    return BundleMorphism(
        base_map=SmoothField(alg.base, lambda x: x, (alg.base.dim,)),
        fiber_map=constant_field(alg.base, np.eye(alg.fiber_dim)),
        target=alg.base,
    )


def linear_morphism(source: Box, target: Box, base_matrix, fiber_matrix, offset=None) -> BundleMorphism:
    """``x -> T x + c`` on the base with a constant fibre matrix."""
    T = np.asarray(base_matrix, dtype=float)
    c = np.zeros(T.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    return BundleMorphism(
        base_map=SmoothField(source, lambda x: T @ x + c, (T.shape[0],)),
        fiber_map=constant_field(source, np.asarray(fiber_matrix, dtype=float)),
        target=target,
    )


def linear_image(box: Box, matrix) -> Box:
    """Smallest box holding ``T box``."""
    T = np.asarray(matrix, dtype=float)
    lo, hi = np.array(box.lower), np.array(box.upper)
    low = np.minimum(T * lo, T * hi).sum(axis=1)
    high = np.maximum(T * lo, T * hi).sum(axis=1)
    return Box(tuple(low), tuple(high))


@dataclass(frozen=True)
class Transport:
    """The image of an algebroid under an invertible linear change of base and fibre coordinates."""

    target: LocalAlgebroid
    morphism: BundleMorphism
    base_matrix: np.ndarray
    fiber_matrix: np.ndarray

    def push(self, a: Section) -> Section:
        """``y -> S a(T^-1 y)``, the section of the target related to ``a``."""
        Ti = np.linalg.inv(self.base_matrix)
        S = self.fiber_matrix
        return section(self.target.base, lambda y: S @ a(Ti @ y), self.target.fiber_dim)


def transport(alg: LocalAlgebroid, base_matrix, fiber_matrix, base: Box | None = None) -> Transport:
    """Carry ``alg`` along ``x -> T x`` with fibre map ``S``: the target has anchor ``T rho S^-1`` and
    structure ``S C(S^-1 ., S^-1 .)``, so ``(T, S)`` is a Lie algebroid isomorphism onto it. The target
    box defaults to the smallest box holding ``T`` of the source box."""
    T = np.asarray(base_matrix, dtype=float)
    S = np.asarray(fiber_matrix, dtype=float)
    m, n = alg.base.dim, alg.fiber_dim
    if T.shape != (m, m) or S.shape != (n, n):
        raise ShapeError(f"Transport needs a ({m}, {m}) base matrix and a ({n}, {n}) fibre matrix")
    for label, matrix in (("base", T), ("fibre", S)):
        if matrix_rank(matrix)[0] < matrix.shape[0]:
            raise ValidationError(f"The {label} matrix of a transport must be invertible")
    Ti, Si = np.linalg.inv(T), np.linalg.inv(S)
    if base is None:
        base = linear_image(alg.base, T)
    elif base.dim != m:
        raise ShapeError(f"Target box has dimension {base.dim}, expected {m}")

    def anchor(y):
        return (T @ alg.anchor(Ti @ y)) @ Si

    def structure(y):
        c = np.tensordot(S, alg.structure(Ti @ y), axes=(1, 0))
        return Si.T @ c @ Si

    target = make_algebroid(
        base,
        n,
        SmoothField(base, anchor, (m, n)),
        SmoothField(base, structure, (n, n, n)),
        alg.claims_jacobi,
        f"{alg.name} transported" if alg.name else "transported",
    )
    return Transport(target, linear_morphism(alg.base, base, T, S), T, S)


@dataclass(frozen=True)
class LieMorphismDefect:
    anchor: np.ndarray
    related: tuple[np.ndarray, np.ndarray]
    bracket: np.ndarray

    @property
    def related_max(self) -> float:
        return max(max_abs(r) for r in self.related)

    def max(self) -> float:
        return max(max_abs(self.anchor), self.related_max, max_abs(self.bracket))


def lie_morphism_defect(alg1, alg2, morphism: BundleMorphism, pair1, pair2, x) -> LieMorphismDefect:
    """Anchor compatibility, relatedness residuals and bracket compatibility of a morphism at ``x``.

    ``pair1`` and ``pair2`` are ``(a, a')`` with ``a`` a section of ``alg1`` and ``a'`` of ``alg2``."""
    ctx1, ctx2 = as_context(alg1), as_context(alg2)
    x = as_array(x)
    y = morphism.base_map(x)
    if not ctx2.base.contains(y):
        raise DomainError(f"Base map sends {primal(x).tolist()} outside the target box {ctx2.base.bounds}")
    phi = morphism.fiber_map(x)
    anchor = ctx2.anchor(y) @ phi - jacobian(morphism.base_map, x) @ ctx1.anchor(x)
    (a1, b1), (a2, b2) = pair1, pair2
    related = (primal(phi @ a1(x) - b1(y)), primal(phi @ a2(x) - b2(y)))
    br = phi @ ctx1.bracket(a1, a2)(x) - ctx2.bracket(b1, b2)(y)
    return LieMorphismDefect(primal(anchor), related, primal(br))


def so3_constants() -> np.ndarray:
    """Structure constants of the cross product, ``C[k, i, j] = eps_kij``."""
    return np.array(
        [[[float(LeviCivita(k, i, j)) for j in range(3)] for i in range(3)] for k in range(3)]
    )


def make_tangent(base: Box) -> LocalAlgebroid:
    m = base.dim
    return make_algebroid(
        base, m, constant_field(base, np.eye(m)), constant_field(base, np.zeros((m, m, m))), True, "tangent"
    )


def make_lie_algebra_bundle(base: Box, constants, claims_jacobi: bool = True, name: str = "") -> LocalAlgebroid:
    """Trivial bundle with zero anchor and constant structure."""
    c = np.asarray(constants, dtype=float)
    n = c.shape[0]
    if c.shape != (n, n, n):
        raise ShapeError(f"Structure constants have shape {c.shape}, expected {(n, n, n)}")
    return make_algebroid(
        base, n, constant_field(base, np.zeros((base.dim, n))), constant_field(base, c), claims_jacobi, name
    )


def make_rank_drop(base: Box) -> LocalAlgebroid:
    """``rho_x = diag(1, x_1)`` with zero structure; the anchor loses rank along ``x_1 = 0``."""
    if base.dim != 2:
        raise ShapeError("The rank-drop algebroid lives on a two-dimensional base")

    def anchor(x):
        out = np.full((2, 2), 0.0, dtype=object)
        out[0, 0] = 1.0
        out[1, 1] = x[0]
        return out

    return make_algebroid(
        base, 2, SmoothField(base, anchor, (2, 2)), constant_field(base, np.zeros((2, 2, 2))), False, "rank-drop"
    )


def non_jacobi_constants() -> np.ndarray:
    """``C(e1, e2) = e1`` and ``C(e2, e3) = e2``; the jacobiator of the basis is ``e1``."""
    c = np.zeros((3, 3, 3))
    c[0, 0, 1], c[0, 1, 0] = 1.0, -1.0
    c[1, 1, 2], c[1, 2, 1] = 1.0, -1.0
    return c


def make_rotation_action(base: Box) -> LocalAlgebroid:
    """Action algebroid of the rotation vector field on the plane."""
    if base.dim != 2:
        raise ShapeError("The rotation action lives on a two-dimensional base")

    def anchor(x):
        out = np.empty((2, 1), dtype=object)
        out[0, 0], out[1, 0] = -x[1], x[0]
        return out

    return make_algebroid(
        base, 1, SmoothField(base, anchor, (2, 1)), constant_field(base, np.zeros((1, 1, 1))), True, "action:rotation"
    )


def make_sine_action(base: Box) -> LocalAlgebroid:
    """Action algebroid of ``d/dx_0 + sin(x_0) d/dx_1``, a non-polynomial anchor."""
    if base.dim != 2:
        raise ShapeError("The sine action lives on a two-dimensional base")

    def anchor(x):
        out = np.empty((2, 1), dtype=object)
        out[0, 0], out[1, 0] = 1.0, sin(x[0])
        return out

    return make_algebroid(
        base, 1, SmoothField(base, anchor, (2, 1)), constant_field(base, np.zeros((1, 1, 1))), True, "action:sine"
    )


BUILTINS = {
    "tangent": (lambda base: make_tangent(base), 2),
    "lie-algebra:so3": (lambda base: make_lie_algebra_bundle(base, so3_constants(), True, "lie-algebra:so3"), 2),
    "rank-drop": (make_rank_drop, 2),
    "non-jacobi": (lambda base: make_lie_algebra_bundle(base, non_jacobi_constants(), False, "non-jacobi"), 1),
    "action:rotation": (make_rotation_action, 2),
    "action:sine": (make_sine_action, 2),
}


def builtin(name: str, base: Box | None = None) -> LocalAlgebroid:
    """A named algebroid from the builtin registry, on ``base`` or on its default cube."""
    if name not in BUILTINS:
        raise ValueError(f"Unknown builtin algebroid {name}; must be one of {', '.join(BUILTINS)}")
    factory, default_dim = BUILTINS[name]
    return factory(base if base is not None else Box.cube(default_dim))
