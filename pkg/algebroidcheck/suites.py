"""The check suites a scenario can request.

Each suite samples one kind of instance (algebroid, prolongation, connection or tower) at deterministic
points with deterministic random polynomial sections, and records every defect it measures into a
:class:`~algebroidcheck.utils.CheckReport`. Suites never raise into the runner on a failed identity: a
failure is a defect above tolerance.

Default tolerances follow four tiers: 1e-10 and below for identities that are algebraically exact,
1e-8 for identities that pass through nested jets, 1e-7 against symbolic derivatives and 1e-5 for
finite-difference cross-checks.
"""

import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import sympy

from algebroidcheck.algebroid import (
    LocalAlgebroid,
    antisymmetry_defect,
    anchor_morphism_defect,
    as_context,
    bracket,
    constant_section,
    identity_morphism,
    jacobiator,
    jet_dependence_defect,
    leibniz_defect,
    lie_morphism_defect,
    linear_image,
    nijenhuis,
    transport,
)
from algebroidcheck.connect import (
    Connection,
    apply_semi_basic,
    connection_endo,
    horizontal_lift,
    projectors,
    semi_basic,
    semi_basic_difference,
    splitting,
)
from algebroidcheck.forms import (
    KForm,
    cartan_defect,
    exterior_derivative,
    form_from_coefficients,
    function_form,
    insert,
    lam_defect,
    lie_commutation_defect,
    wedge,
)
from algebroidcheck.jets import Box, SmoothField, constant_field, directional, finite_difference, primal
from algebroidcheck.polynomial import random_polynomial
from algebroidcheck.prolong import (
    ModuleSection,
    Prolongation,
    context_of,
    hat_anchor_morphism_defect,
    kernel_identity,
    make_projectable,
    membership_defect,
    prolong_bracket,
    prolong_morphism,
    tangent_prolongation,
    vertical_independence_defect,
    vertical_lift,
)
from algebroidcheck.towers import (
    Tower,
    check_anchored_sequence,
    check_bonding_laws,
    check_direct_sequence,
    check_prolong_compat,
    constant_along_fibres,
    limit_bracket_defect,
    make_thread,
    thread_defect,
)
from algebroidcheck.utils import CheckReport, max_abs

# nested module brackets on prolongations are sampled at fewer points
HEAVY_POINTS = 8
LIMIT_PAIRS = 32


def instance_kind(instance) -> str:
    if isinstance(instance, LocalAlgebroid):
        return "algebroid"
    if isinstance(instance, Prolongation):
        return "prolongation"
    if isinstance(instance, Connection):
        return "connection"
    if isinstance(instance, Tower):
        return "tower"
    raise TypeError(f"Not a checkable instance: {type(instance).__name__}")


def claims_jacobi(instance) -> bool:
    if isinstance(instance, LocalAlgebroid):
        return instance.claims_jacobi
    if isinstance(instance, Prolongation):
        return instance.alg.claims_jacobi
    return True


def instance_box(instance) -> Box:
    kind = instance_kind(instance)
    if kind == "algebroid":
        return instance.base
    if kind == "prolongation":
        return instance.total
    if kind == "connection":
        return instance.prol.total
    return instance.levels[-1].fib.total


@dataclass
class Probe:
    """Deterministic sampling state for one suite on one instance."""

    label: str
    report: CheckReport
    rng: np.random.Generator
    seed: int
    count: int
    margin: float

    @classmethod
    def create(cls, suite: str, label: str, report: CheckReport, seed: int, count: int, margin: float) -> "Probe":
        stream = zlib.crc32(f"{suite}/{label}".encode())
        return cls(label, report, np.random.default_rng([seed, stream]), seed, count, margin)

    def points(self, box: Box, limit: int | None = None) -> np.ndarray:
        count = self.count if limit is None else min(self.count, limit)
        return box.samples(count, self.seed, self.margin)

    def record(self, value: float, point, detail: str) -> None:
        self.report.record(value, point, f"{self.label}: {detail}")

    def vector(self, size: int) -> np.ndarray:
        return self.rng.uniform(-1.0, 1.0, size)


def _context(instance):
    return context_of(instance) if isinstance(instance, Prolongation) else as_context(instance)


def _section(probe: Probe, instance) -> SmoothField:
    if isinstance(instance, Prolongation):
        prol = instance
        X = make_projectable(
            prol,
            random_polynomial(probe.rng, prol.alg.base, (prol.n,)),
            random_polynomial(probe.rng, prol.total, (prol.p,)),
        )
        return ModuleSection(prol, [(random_polynomial(probe.rng, prol.total, (), degree=1), X)])
    return random_polynomial(probe.rng, instance.base, (instance.fiber_dim,))


def _function(probe: Probe, box: Box) -> SmoothField:
    return random_polynomial(probe.rng, box, ())


def _one_form(probe: Probe, ctx) -> KForm:
    return form_from_coefficients(random_polynomial(probe.rng, ctx.base, (ctx.fiber_dim,)), ctx.fiber_dim, 1)


def _points(probe: Probe, instance, heavy: bool = False) -> np.ndarray:
    return probe.points(instance_box(instance), HEAVY_POINTS if heavy and isinstance(instance, Prolongation) else None)


def check_jets(alg: LocalAlgebroid, probe: Probe) -> None:
    a = _section(probe, alg)
    for x in _points(probe, alg):
        v = probe.vector(alg.base.dim)
        for label, field in (("anchor", alg.anchor), ("structure", alg.structure), ("section", a)):
            exact = primal(directional(field, x, v))
            approx = finite_difference(field, x, v)
            probe.record(max_abs(exact - approx) / (1.0 + max_abs(exact)), x, f"{label} derivative")


def check_antisymmetry(instance, probe: Probe) -> None:
    ctx = _context(instance)
    a, b = _section(probe, instance), _section(probe, instance)
    for x in _points(probe, instance):
        probe.record(max_abs(antisymmetry_defect(ctx, a, b, x)), x, "[a, b] + [b, a]")
        probe.record(max_abs(primal(bracket(ctx, a, a)(x))), x, "[a, a]")


def check_leibniz(instance, probe: Probe) -> None:
    ctx = _context(instance)
    a, b = _section(probe, instance), _section(probe, instance)
    f = _function(probe, ctx.base)
    for x in _points(probe, instance):
        probe.record(max_abs(leibniz_defect(ctx, a, b, f, x)), x, "Leibniz rule")


def check_jet_dependence(alg: LocalAlgebroid, probe: Probe) -> None:
    a = _section(probe, alg)
    w = probe.vector(alg.fiber_dim)
    for x in _points(probe, alg):
        probe.record(jet_dependence_defect(alg, a, x, w), x, "second-order change of a")


def check_jacobi(instance, probe: Probe) -> None:
    ctx = _context(instance)
    a, b, c = (_section(probe, instance) for _ in range(3))
    for x in _points(probe, instance, heavy=True):
        probe.record(max_abs(jacobiator(ctx, a, b, c, x)), x, "jacobiator")


def check_anchor_morphism(alg: LocalAlgebroid, probe: Probe) -> None:
    a, b = _section(probe, alg), _section(probe, alg)
    for x in _points(probe, alg):
        probe.record(max_abs(anchor_morphism_defect(alg, a, b, x)), x, "rho[a, b] - [rho a, rho b]")


def check_tensoriality(alg: LocalAlgebroid, probe: Probe) -> None:
    a, b, c = (_section(probe, alg) for _ in range(3))
    f = _function(probe, alg.base)
    for x in _points(probe, alg):
        J = jacobiator(alg, a, b, c, x)
        Jf = jacobiator(alg, f * a, b, c, x)
        probe.record(max_abs(Jf - primal(f(x)) * J), x, "J(f a, b, c) - f J(a, b, c)")
        probe.record(max_abs(primal(alg.anchor(x)) @ J), x, "rho J")


def check_nijenhuis(alg: LocalAlgebroid, probe: Probe) -> None:
    n = alg.fiber_dim
    A = random_polynomial(probe.rng, alg.base, (n, n), degree=1)
    a, b = _section(probe, alg), _section(probe, alg)
    f = _function(probe, alg.base)
    # the minus variant is only function-linear for A² = -I
    J = None
    if n % 2 == 0:
        half = n // 2
        J = constant_field(alg.base, np.block([[np.zeros((half, half)), -np.eye(half)], [np.eye(half), np.zeros((half, half))]]))
    for x in _points(probe, alg):
        N = nijenhuis(alg, A, a, b, x, variant="general")
        fx = primal(f(x))
        probe.record(max_abs(nijenhuis(alg, A, f * a, b, x, variant="general") - fx * N), x, "N(f a, b) - f N(a, b)")
        probe.record(max_abs(nijenhuis(alg, A, a, f * b, x, variant="general") - fx * N), x, "N(a, f b) - f N(a, b)")
        if J is not None:
            M = nijenhuis(alg, J, a, b, x, variant="minus")
            probe.record(max_abs(nijenhuis(alg, J, f * a, b, x, variant="minus") - fx * M), x, "complex structure: minus variant")


def check_d_squared(instance, probe: Probe) -> None:
    ctx = _context(instance)
    n = ctx.fiber_dim
    f = _function(probe, ctx.base)
    omega = _one_form(probe, ctx)
    ddf = exterior_derivative(ctx, exterior_derivative(ctx, function_form(f, n)))
    ddw = exterior_derivative(ctx, exterior_derivative(ctx, omega))
    for x in _points(probe, instance, heavy=True):
        u, v, w = probe.vector(n), probe.vector(n), probe.vector(n)
        probe.record(abs(primal(ddf(x, u, v))), x, "d d f")
        probe.record(abs(primal(ddw(x, u, v, w))), x, "d d omega")


def check_wedge_leibniz(alg: LocalAlgebroid, probe: Probe) -> None:
    ctx = as_context(alg)
    n = alg.fiber_dim
    eta, zeta = _one_form(probe, ctx), _one_form(probe, ctx)
    g = function_form(_function(probe, alg.base), n)

    def d(omega: KForm) -> KForm:
        return exterior_derivative(ctx, omega)

    lhs1 = d(wedge(eta, zeta))
    rhs1 = wedge(d(eta), zeta) - wedge(eta, d(zeta))
    lhs0 = d(wedge(g, zeta))
    rhs0 = wedge(d(g), zeta) + wedge(g, d(zeta))
    for x in _points(probe, alg):
        u, v, w = probe.vector(n), probe.vector(n), probe.vector(n)
        probe.record(abs(primal(lhs1(x, u, v, w) - rhs1(x, u, v, w))), x, "d(eta ^ zeta), degree 1")
        probe.record(abs(primal(lhs0(x, u, v) - rhs0(x, u, v))), x, "d(g zeta), degree 0")


def check_wedge_algebra(alg: LocalAlgebroid, probe: Probe) -> None:
    ctx = as_context(alg)
    n = alg.fiber_dim
    forms = [_one_form(probe, ctx) for _ in range(3)]
    two = wedge(forms[0], forms[1])
    a = _section(probe, alg)
    for x in _points(probe, alg):
        u, v, w = probe.vector(n), probe.vector(n), probe.vector(n)
        s, t = probe.rng.uniform(-1.0, 1.0, 2)
        eta, zeta, xi = forms
        probe.record(abs(two(x, u, v) + two(x, v, u)), x, "antisymmetry")
        probe.record(abs(two(x, s * u + t * w, v) - s * two(x, u, v) - t * two(x, w, v)), x, "linearity")
        probe.record(abs(two(x, u, v) + wedge(zeta, eta)(x, u, v)), x, "graded commutativity")
        lhs = wedge(two, xi)(x, u, v, w)
        rhs = wedge(eta, wedge(zeta, xi))(x, u, v, w)
        probe.record(abs(lhs - rhs), x, "associativity")
        ins = insert(a, two)(x, u) - (wedge(insert(a, eta), zeta)(x, u) - wedge(eta, insert(a, zeta))(x, u))
        probe.record(abs(primal(ins)), x, "insertion anti-derivation")


def symbolic_jacobian(field: SmoothField) -> Callable:
    """Exact Jacobian of a polynomial field, derivative axis last, from sympy's derivatives of the field
    evaluated on symbols."""
    xs = sympy.symbols(f"x0:{field.domain.dim}")
    exprs = np.asarray(field.fn(np.array(xs, dtype=object)), dtype=object)
    numeric = sympy.lambdify([xs], [[sympy.diff(e, s) for s in xs] for e in exprs.ravel()], "numpy")
    return lambda x: np.array(numeric(list(primal(x))), dtype=float).reshape(field.shape + (len(xs),))


def check_de_rham(alg: LocalAlgebroid, probe: Probe) -> None:
    ctx = as_context(alg)
    m = alg.base.dim
    coeffs = random_polynomial(probe.rng, alg.base, (m,))
    omega = form_from_coefficients(coeffs, m, 1)
    f = _function(probe, alg.base)
    d_omega = exterior_derivative(ctx, omega)
    d_f = exterior_derivative(ctx, function_form(f, m))
    G, grad = symbolic_jacobian(coeffs), symbolic_jacobian(f)
    for x in _points(probe, alg):
        u, v = probe.vector(m), probe.vector(m)
        g = G(x)
        classical = v @ (g @ u) - u @ (g @ v)
        probe.record(abs(primal(d_omega(x, u, v)) - classical), x, "d omega against symbolic derivatives")
        probe.record(abs(primal(d_f(x, u)) - grad(x) @ u), x, "d f against symbolic derivatives")


def check_lie_commutation(alg: LocalAlgebroid, probe: Probe) -> None:
    a = _section(probe, alg)
    f = _function(probe, alg.base)
    for x in _points(probe, alg):
        probe.record(lie_commutation_defect(alg, a, f, x, probe.vector(alg.fiber_dim)), x, "L_a d f - d L_a f")


def check_cartan(alg: LocalAlgebroid, probe: Probe) -> None:
    ctx = as_context(alg)
    a = _section(probe, alg)
    omega = _one_form(probe, ctx)
    f = function_form(_function(probe, alg.base), alg.fiber_dim)
    for x in _points(probe, alg):
        probe.record(cartan_defect(ctx, a, omega, x, [probe.vector(alg.fiber_dim)]), x, "Cartan formula on a 1-form")
        probe.record(cartan_defect(ctx, a, f, x, []), x, "Cartan formula on a function")


def check_identity_morphism(alg: LocalAlgebroid, probe: Probe) -> None:
    ctx = as_context(alg)
    identity = identity_morphism(alg)
    a, b = _section(probe, alg), _section(probe, alg)
    f = _function(probe, alg.base)
    omega = _one_form(probe, ctx)
    for x in _points(probe, alg):
        probe.record(lie_morphism_defect(alg, alg, identity, (a, a), (b, b), x).max(), x, "Lie morphism defect")
        probe.record(lam_defect(ctx, ctx, identity, f, omega, x).max(), x, "pullback commutes with d")


def _invertible(probe: Probe, size: int) -> np.ndarray:
    # strictly diagonally dominant below ten dimensions
    return np.eye(size) + 0.1 * probe.rng.uniform(-1.0, 1.0, (size, size))


def check_linear_morphism(alg: LocalAlgebroid, probe: Probe) -> None:
    moved = transport(alg, _invertible(probe, alg.base.dim), _invertible(probe, alg.fiber_dim))
    ctx1, ctx2 = as_context(alg), as_context(moved.target)
    a, b = _section(probe, alg), _section(probe, alg)
    f = _function(probe, moved.target.base)
    omega = _one_form(probe, ctx2)
    for x in _points(probe, alg):
        defect = lie_morphism_defect(alg, moved.target, moved.morphism, (a, moved.push(a)), (b, moved.push(b)), x)
        probe.record(defect.max(), x, "Lie morphism defect")
        probe.record(lam_defect(ctx1, ctx2, moved.morphism, f, omega, x).max(), x, "pullback commutes with d")

    T, S = moved.base_matrix, moved.fiber_matrix
    source = tangent_prolongation(alg)
    target = tangent_prolongation(moved.target, linear_image(source.fib.fiber, S))
    block = scipy.linalg.block_diag(T, S)
    total = SmoothField(source.total, lambda y: block @ y, (source.total.dim,))
    lifted = prolong_morphism(source, target, moved.morphism, total, samples=HEAVY_POINTS)
    probe.record(lifted.anchor_defect, source.total.center, "lifted morphism anchor")
    derived = transport(source.derived, block, scipy.linalg.block_diag(S, S), base=target.total)
    X, Y = _section(probe, source.derived), _section(probe, source.derived)
    for y in probe.points(source.total, HEAVY_POINTS):
        pairs = (X, derived.push(X)), (Y, derived.push(Y))
        defect = lie_morphism_defect(source.derived, target.derived, lifted.morphism, *pairs, y)
        probe.record(defect.max(), y, "lifted Lie morphism defect")


def check_prolong_bracket(prol: Prolongation, probe: Probe) -> None:
    X, Y = _section(probe, prol), _section(probe, prol)
    for y in _points(probe, prol):
        module = prolong_bracket(prol, X, Y)(y)
        generic = bracket(prol.derived, X, Y)(y)
        probe.record(max_abs(primal(module - generic)), y, "module bracket against the derived bracket")


def check_hat_anchor(prol: Prolongation, probe: Probe) -> None:
    X, Y = _section(probe, prol), _section(probe, prol)
    for y in _points(probe, prol, heavy=True):
        probe.record(max_abs(hat_anchor_morphism_defect(prol, X, Y, y)), y, "rho_hat[X, Y] - [rho_hat X, rho_hat Y]")


def check_vertical(prol: Prolongation, probe: Probe) -> None:
    def vertical():
        Z = vertical_lift(prol, random_polynomial(probe.rng, prol.total, (prol.p,)))
        return ModuleSection(prol, [(random_polynomial(probe.rng, prol.total, (), degree=1), Z)])

    Z, W = vertical(), vertical()
    for y in _points(probe, prol):
        defect = vertical_independence_defect(prol, Z, W, y)
        probe.record(max_abs(defect.base_component), y, "bracket of verticals leaves the vertical block")
        probe.record(max_abs(defect.difference), y, "bracket of verticals depends on the structure field")


def check_kernel_identity(prol: Prolongation, probe: Probe) -> None:
    m = prol.alg.base.dim
    for y in _points(probe, prol):
        k = kernel_identity(prol, y)
        balance = abs(k.hat_nullity - k.base_nullity)
        balance += abs(k.hat_nullity + k.projection_nullity - k.base_nullity - k.fiber_dim)
        probe.record(float(balance), y, "nullity balance")
        a = probe.vector(prol.n)
        lift = make_projectable(prol, constant_section(prol.alg.base, a), constant_field(prol.total, np.zeros(prol.p)))
        value = primal(prol.derived.anchor(y) @ lift(y))
        probe.record(max_abs(membership_defect(prol, y, a, (value[:m], value[m:]))), y, "projectable section through a")


def check_connection(conn: Connection, probe: Probe) -> None:
    prol = conn.prol
    n, p = prol.n, prol.p
    size = n + p
    eye = np.eye(size)
    endo = connection_endo(conn)
    h, v = projectors(conn)
    forward, inverse = splitting(conn)
    shift = random_polynomial(probe.rng, prol.total, (p, n), degree=1)

    def upsilon(y):
        out = np.full((size, size), 0.0, dtype=object)
        out[n:, :n] = -2.0 * shift(y)
        return out

    tensor = semi_basic(prol, SmoothField(prol.total, upsilon, (size, size)))
    moved = apply_semi_basic(conn, tensor)
    recovered = semi_basic_difference(conn, moved)
    a = random_polynomial(probe.rng, prol.alg.base, (n,))
    lift = horizontal_lift(conn, a)
    vertical = np.vstack([np.zeros((n, p)), np.eye(p)])
    for y in _points(probe, conn):
        N, H, V = primal(endo(y)), primal(h(y)), primal(v(y))
        probe.record(max_abs(N @ N - eye), y, "N N = I")
        probe.record(max_abs(H @ H - H), y, "h h = h")
        probe.record(max_abs(V @ V - V), y, "v v = v")
        probe.record(max(max_abs(H @ V), max_abs(V @ H)), y, "h v = v h = 0")
        probe.record(max_abs(H + V - eye), y, "h + v = I")
        probe.record(max_abs(N - (H - V)), y, "N = h - v")
        probe.record(max_abs(V @ vertical - vertical), y, "v is the identity on verticals")
        probe.record(max_abs(H @ vertical), y, "h kills verticals")
        probe.record(max_abs(V[:n, :]), y, "v takes vertical values")
        probe.record(max_abs(primal(forward(y)) @ primal(inverse(y)) - eye), y, "splitting round trip")
        probe.record(max_abs(primal(recovered(y)) - primal(tensor(y))), y, "semi-basic round trip")
        value = primal(lift(y))
        probe.record(max_abs(V @ value), y, "horizontal lift is horizontal")
        probe.record(max_abs(value[:n] - primal(a(y[: prol.alg.base.dim]))), y, "horizontal lift covers a")


def check_tower_bonding(tower: Tower, probe: Probe) -> None:
    probe.report.merge(check_bonding_laws(tower, probe.count, probe.seed))


def check_tower_anchored(tower: Tower, probe: Probe) -> None:
    probe.report.merge(check_anchored_sequence(tower, min(probe.count, 16), probe.seed))


def check_tower_prolongation(tower: Tower, probe: Probe) -> None:
    if tower.kind == "direct":
        probe.report.merge(check_direct_sequence(tower, probe.count, probe.seed))
    else:
        probe.report.merge(check_prolong_compat(tower, probe.count, probe.seed))


def check_tower_thread(tower: Tower, probe: Probe) -> None:
    start = tower.levels[-1] if tower.kind == "projective" else tower.levels[0]
    for x in probe.points(start.alg.base):
        probe.record(thread_defect(tower, make_thread(tower, x)), x, "thread transport")


def check_tower_limit_bracket(tower: Tower, probe: Probe) -> None:
    for source, target in tower.pairs():
        b = tower.bonding(source, target)
        prol = tower.prolongation(source)
        for at in prol.total.samples(LIMIT_PAIRS, probe.seed, max(probe.margin, 0.05)):
            X = constant_along_fibres(tower, b, _section(probe, prol))
            Y = constant_along_fibres(tower, b, _section(probe, prol))
            defect = limit_bracket_defect(tower, source, target, X, Y, at)
            probe.record(defect.related, at, f"bonding {source}->{target}: relatedness")
            probe.record(max_abs(defect.bracket), at, f"bonding {source}->{target}: lifted bracket")


@dataclass(frozen=True)
class Suite:
    name: str
    kinds: tuple[str, ...]
    tolerance: float
    check: Callable
    needs_jacobi: bool = False
    summary: str = ""

    def applies_to(self, instance) -> bool:
        if instance_kind(instance) not in self.kinds:
            return False
        if self.name == "de-rham":
            return isinstance(instance, LocalAlgebroid) and instance.name == "tangent"
        return claims_jacobi(instance) or not self.needs_jacobi


_DECLARED = [
    Suite("jets", ("algebroid",), 1e-5, check_jets, summary="jet derivatives against central differences"),
    Suite("antisymmetry", ("algebroid", "prolongation"), 1e-10, check_antisymmetry, summary="[a, b] = -[b, a]"),
    Suite("leibniz", ("algebroid", "prolongation"), 1e-9, check_leibniz, summary="Leibniz rule"),
    Suite("jet-dependence", ("algebroid",), 1e-9, check_jet_dependence, summary="bracket depends on 1-jets only"),
    Suite("jacobi", ("algebroid",), 1e-8, check_jacobi, summary="jacobiator vanishes"),
    Suite("anchor-morphism", ("algebroid",), 1e-8, check_anchor_morphism, True, "anchor intertwines brackets"),
    Suite("tensoriality", ("algebroid",), 1e-8, check_tensoriality, True, "jacobiator is tensorial and in ker rho"),
    Suite("nijenhuis", ("algebroid",), 1e-8, check_nijenhuis, summary="general Nijenhuis torsion is tensorial"),
    Suite("d-squared", ("algebroid", "prolongation"), 1e-8, check_d_squared, True, "d d = 0"),
    Suite("wedge-leibniz", ("algebroid",), 1e-8, check_wedge_leibniz, summary="d is a graded derivation"),
    Suite("wedge-algebra", ("algebroid",), 1e-10, check_wedge_algebra, summary="wedge and insertion laws"),
    Suite("de-rham", ("algebroid",), 1e-7, check_de_rham, summary="tangent d against symbolic classical d"),
    Suite("lie-commutation", ("algebroid",), 1e-8, check_lie_commutation, True, "L_a commutes with d on functions"),
    Suite("cartan", ("algebroid",), 1e-8, check_cartan, True, "L_a = i_a d + d i_a"),
    Suite("identity-morphism", ("algebroid",), 1e-14, check_identity_morphism, summary="identity is a Lie morphism"),
    Suite("linear-morphism", ("algebroid",), 1e-9, check_linear_morphism, summary="linear isomorphisms and their lifts"),
    Suite("prolong-bracket", ("prolongation",), 1e-9, check_prolong_bracket, summary="module bracket = derived bracket"),
    Suite("hat-anchor", ("prolongation",), 1e-8, check_hat_anchor, True, "rho_hat intertwines brackets"),
    Suite("vertical", ("prolongation",), 1e-9, check_vertical, summary="vertical brackets are vertical, C-free"),
    Suite("kernel-identity", ("prolongation",), 0.5, check_kernel_identity, summary="nullity balance, surjectivity"),
    Suite("prolong-jacobi", ("prolongation",), 1e-8, check_jacobi, True, "jacobiator on module sections"),
    Suite("connection", ("connection",), 1e-12, check_connection, summary="involution and projector algebra"),
    Suite("tower-bonding", ("tower",), 1e-10, check_tower_bonding, summary="composite bonding laws"),
    Suite("tower-anchored", ("tower",), 1e-8, check_tower_anchored, summary="bondings are Lie morphisms"),
    Suite("tower-prolongation", ("tower",), 1e-10, check_tower_prolongation, summary="fibrations nest along bondings"),
    Suite("tower-thread", ("tower",), 1e-12, check_tower_thread, summary="threads transport exactly"),
    Suite("tower-limit-bracket", ("tower",), 1e-8, check_tower_limit_bracket, summary="lifted bondings keep brackets"),
]

SUITES = {suite.name: suite for suite in _DECLARED}
