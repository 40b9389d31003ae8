"""Differential forms on an algebroid: alternating k-linear maps on fibre vectors, varying smoothly over
the base.

Forms are stored as callables ``fn(x, *vectors)`` rather than coefficient arrays. Insertion and wedge are
pointwise; the Lie derivative and the exterior derivative extend the argument vectors to constant
sections and differentiate through the algebroid's bracket, so they work for any
:class:`~algebroidcheck.algebroid.BracketContext`, prolongations included.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from sympy.combinatorics import Permutation

from algebroidcheck.algebroid import BracketContext, BundleMorphism, Section, as_context, constant_section
from algebroidcheck.jets import Box, SmoothField, as_array, compose, directional, primal
from algebroidcheck.utils import DomainError, ShapeError, max_abs


def _scalar(v):
    if isinstance(v, np.ndarray):
        if v.shape != ():
            raise ShapeError(f"Form evaluated to shape {v.shape}, expected a scalar")
        return v.item()
    return v


@lru_cache(maxsize=None)
def _parity(order: tuple[int, ...]) -> int:
    if len(order) < 2:
        return 1
    return -1 if Permutation(list(order)).is_odd else 1


@lru_cache(maxsize=None)
def _shuffles(k: int, l: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...], int], ...]:
    out = []
    for head in itertools.combinations(range(k + l), k):
        tail = tuple(i for i in range(k + l) if i not in head)
        out.append((head, tail, _parity(head + tail)))
    return tuple(out)


@dataclass(frozen=True)
class KForm:
    degree: int
    domain: Box
    fiber_dim: int
    fn: Callable

    def __call__(self, x, *vectors):
        if len(vectors) != self.degree:
            raise ShapeError(f"A {self.degree}-form takes {self.degree} vectors, got {len(vectors)}")
        vs = []
        for v in vectors:
            v = as_array(v)
            if v.shape != (self.fiber_dim,):
                raise ShapeError(f"Form argument has shape {v.shape}, expected ({self.fiber_dim},)")
            vs.append(v)
        return _scalar(self.fn(as_array(x), *vs))

    def on(self, *sections: Section) -> SmoothField:
        """The function ``x -> form_x(s1(x), ..., sk(x))``."""
        return SmoothField(self.domain, lambda x: self(x, *(s(x) for s in sections)), ())

    def as_field(self) -> SmoothField:
        if self.degree != 0:
            raise ShapeError(f"Only 0-forms are functions; this form has degree {self.degree}")
        return self.on()

    def __add__(self, other: "KForm") -> "KForm":
        _same_space(self, other)
        if other.degree != self.degree:
            raise ShapeError("Cannot add forms of different degree")
        return KForm(self.degree, self.domain, self.fiber_dim, lambda x, *vs: self(x, *vs) + other(x, *vs))

    def __sub__(self, other: "KForm") -> "KForm":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "KForm":
        return KForm(self.degree, self.domain, self.fiber_dim, lambda x, *vs: c * self(x, *vs))


def _same_space(a: KForm, b: KForm) -> None:
    if a.domain != b.domain or a.fiber_dim != b.fiber_dim:
        raise ShapeError("Forms live on different algebroids")


def zero_form(domain: Box, fiber_dim: int, degree: int) -> KForm:
    return KForm(degree, domain, fiber_dim, lambda x, *vs: 0.0)


def function_form(f: SmoothField, fiber_dim: int) -> KForm:
    if f.shape != ():
        raise ShapeError(f"A 0-form needs a scalar field, got shape {f.shape}")
    return KForm(0, f.domain, fiber_dim, lambda x: f(x))


def _det(rows) -> object:
    k = len(rows)
    total = 0.0
    for perm in itertools.permutations(range(k)):
        term = float(_parity(perm))
        for r in range(k):
            term = term * rows[r][perm[r]]
        total = total + term
    return total


def form_from_coefficients(coefficients: SmoothField, fiber_dim: int, degree: int) -> KForm:
    """``sum_I c_I e^I`` over increasing multi-indices ``I`` in lexicographic order."""
    basis = list(itertools.combinations(range(fiber_dim), degree))
    if coefficients.shape != (len(basis),):
        raise ShapeError(f"Expected {len(basis)} coefficients for a {degree}-form, got shape {coefficients.shape}")

    def fn(x, *vs):
        c = coefficients(x)
        total = 0.0
        for n, index in enumerate(basis):
            rows = [[vs[col][row] for col in range(degree)] for row in index]
            total = total + c[n] * _det(rows)
        return total

    return KForm(degree, coefficients.domain, fiber_dim, fn)


def coefficients(omega: KForm, x) -> np.ndarray:
    """Values on increasing basis multi-indices, the inverse of :func:`form_from_coefficients`."""
    eye = np.eye(omega.fiber_dim)
    return as_array(
        [omega(x, *(eye[i] for i in index)) for index in itertools.combinations(range(omega.fiber_dim), omega.degree)]
    )


def insert(a: Section, omega: KForm) -> KForm:
    """Interior product ``i_a omega``; zero on 0-forms."""
    if a.shape != (omega.fiber_dim,) or a.domain != omega.domain:
        raise ShapeError(f"Section of shape {a.shape} cannot be inserted into a form on fibre dim {omega.fiber_dim}")
    if omega.degree == 0:
        return zero_form(omega.domain, omega.fiber_dim, 0)
    return KForm(omega.degree - 1, omega.domain, omega.fiber_dim, lambda x, *vs: omega(x, a(x), *vs))


def wedge(eta: KForm, zeta: KForm) -> KForm:
    """Shuffle-convention wedge product."""
    _same_space(eta, zeta)
    k, l = eta.degree, zeta.degree
    shuffles = _shuffles(k, l)

    def fn(x, *vs):
        total = 0.0
        for head, tail, sign in shuffles:
            total = total + sign * eta(x, *(vs[i] for i in head)) * zeta(x, *(vs[i] for i in tail))
        return total

    return KForm(k + l, eta.domain, eta.fiber_dim, fn)


def _ctx_for(ctx, omega: KForm) -> BracketContext:
    ctx = as_context(ctx)
    if ctx.base != omega.domain or ctx.fiber_dim != omega.fiber_dim:
        raise ShapeError("Form and algebroid live on different spaces")
    return ctx


def d_rho_fn(ctx, f: SmoothField) -> KForm:
    """The 1-form ``d_rho f = df . rho``."""
    ctx = as_context(ctx)
    if f.shape != () or f.domain != ctx.base:
        raise ShapeError("d_rho needs a scalar field on the algebroid's base box")
    return KForm(1, ctx.base, ctx.fiber_dim, lambda x, v: directional(f, x, ctx.anchor(x) @ v))


def lie_derivative_form(ctx, a: Section, omega: KForm) -> KForm:
    """``(L_a omega)(v...) = L_{rho a}(omega(v...)) - sum_i omega(..., [a, v_i], ...)``."""
    ctx = _ctx_for(ctx, omega)
    if omega.degree == 0:
        f = omega.as_field()
        return KForm(0, ctx.base, ctx.fiber_dim, lambda x: directional(f, x, ctx.anchor(x) @ a(x)))

    def fn(x, *vs):
        sections = [constant_section(ctx.base, v) for v in vs]
        total = directional(omega.on(*sections), x, ctx.anchor(x) @ a(x))
        for i, s in enumerate(sections):
            args = list(vs)
            args[i] = ctx.bracket(a, s)(x)
            total = total - omega(x, *args)
        return total

    return KForm(omega.degree, ctx.base, ctx.fiber_dim, fn)


def exterior_derivative(ctx, omega: KForm) -> KForm:
    """Algebroid exterior derivative by the invariant formula on constant extensions of the arguments."""
    ctx = _ctx_for(ctx, omega)
    if omega.degree == 0:
        return d_rho_fn(ctx, omega.as_field())
    k = omega.degree

    def fn(x, *vs):
        sections = [constant_section(ctx.base, v) for v in vs]
        total = 0.0
        for i in range(k + 1):
            others = sections[:i] + sections[i + 1 :]
            g = omega.on(*others)
            total = total + (-1) ** i * directional(g, x, ctx.anchor(x) @ vs[i])
        for i, j in itertools.combinations(range(k + 1), 2):
            rest = [vs[r] for r in range(k + 1) if r not in (i, j)]
            total = total + (-1) ** (i + j) * omega(x, ctx.bracket(sections[i], sections[j])(x), *rest)
        return total

    return KForm(k + 1, ctx.base, ctx.fiber_dim, fn)


def pullback_form(morphism: BundleMorphism, omega: KForm) -> KForm:
    """``(psi, Phi)^* omega``; raises DomainError where ``psi`` leaves the form's box."""
    if morphism.target != omega.domain:
        raise ShapeError("Morphism target and form domain differ")
    n_source = morphism.fiber_map.shape[1]

    def fn(x, *vs):
        y = morphism.base_map(x)
        if not omega.domain.contains(y):
            raise DomainError(f"Base map sends {primal(x).tolist()} outside the box {omega.domain.bounds}")
        phi = morphism.fiber_map(x)
        return omega(y, *(phi @ v for v in vs))

    return KForm(omega.degree, morphism.source, n_source, fn)


@dataclass(frozen=True)
class LamDefect:
    functions: np.ndarray
    forms: np.ndarray

    def max(self) -> float:
        return max(max_abs(self.functions), max_abs(self.forms))


def lam_defect(ctx1, ctx2, morphism: BundleMorphism, f: SmoothField, omega: KForm, x) -> LamDefect:
    """Commutation of pullback with ``d`` on a function ``f`` and a 1-form ``omega`` of the target, on
    basis vectors of the source fibre."""
    ctx1, ctx2 = as_context(ctx1), as_context(ctx2)
    n = ctx1.fiber_dim
    eye = np.eye(n)
    pulled_df = pullback_form(morphism, d_rho_fn(ctx2, f))
    d_pulled = d_rho_fn(ctx1, compose(f, morphism.base_map))
    functions = [primal(pulled_df(x, eye[i])) - primal(d_pulled(x, eye[i])) for i in range(n)]
    pulled_domega = pullback_form(morphism, exterior_derivative(ctx2, omega))
    d_pulled_omega = exterior_derivative(ctx1, pullback_form(morphism, omega))
    forms = [
        [primal(pulled_domega(x, eye[i], eye[j])) - primal(d_pulled_omega(x, eye[i], eye[j])) for j in range(n)]
        for i in range(n)
    ]
    return LamDefect(np.array(functions, dtype=float), np.array(forms, dtype=float).reshape(n, n))


def cartan_defect(ctx, a: Section, omega: KForm, x, vectors) -> float:
    """``L_a omega - (i_a d omega + d i_a omega)`` evaluated on ``vectors``."""
    ctx = as_context(ctx)
    lhs = lie_derivative_form(ctx, a, omega)(x, *vectors)
    rhs = insert(a, exterior_derivative(ctx, omega))(x, *vectors)
    if omega.degree > 0:
        rhs = rhs + exterior_derivative(ctx, insert(a, omega))(x, *vectors)
    return abs(primal(lhs - rhs))


def lie_commutation_defect(ctx, a: Section, f: SmoothField, x, v) -> float:
    """``L_a(d_rho f) - d_rho(L_a f)`` evaluated on ``v``."""
    ctx = as_context(ctx)
    lhs = lie_derivative_form(ctx, a, d_rho_fn(ctx, f))(x, v)
    rhs = exterior_derivative(ctx, lie_derivative_form(ctx, a, function_form(f, ctx.fiber_dim)))(x, v)
    return abs(primal(lhs - rhs))
