"""Projective and direct towers of prolongations.

A tower is a finite sequence of levels, each an algebroid with a fibration, joined by bondings. In a
projective tower bondings run from level ``j`` down to level ``i < j``; in a direct tower they run up.
Only consecutive bondings are required. Any other bonding is the composite of consecutive ones unless the
tower supplies it explicitly, in which case the bonding laws check it against that composite.

Relatedness and the limit bracket use affine bondings: sections are carried between levels through the
pseudo-inverse of the affine base (or total) map, which is exact on the image.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from algebroidcheck.algebroid import (
    BundleMorphism,
    LocalAlgebroid,
    Section,
    constant_section,
    lie_morphism_defect,
    matrix_rank,
    section,
)
from algebroidcheck.jets import SmoothField, as_array, constant_field, jacobian, primal
from algebroidcheck.prolong import (
    Fibration,
    ModuleSection,
    Prolongation,
    as_module_section,
    build_prolongation,
    make_projectable,
    prolong_bracket,
    prolong_morphism,
)
from algebroidcheck.utils import CheckReport, DomainError, ShapeError, ValidationError, max_abs

TOWER_KINDS = ("projective", "direct")
AFFINE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Level:
    alg: LocalAlgebroid
    fib: Fibration

    def __post_init__(self):
        if self.fib.base != self.alg.base:
            raise ValidationError("Level fibration and algebroid have different base boxes")


@dataclass(frozen=True)
class Bonding:
    """Maps from level ``source`` to level ``target``: base map ``delta``, algebroid fibre map ``zeta_x`` and
    fibration fibre map ``xi_x``, with an optional explicit map of total boxes."""

    source: int
    target: int
    base_map: SmoothField
    alg_map: SmoothField
    fib_map: SmoothField
    total_map: SmoothField | None = None

    def total(self, level: Level) -> SmoothField:
        """The map of total boxes, ``(x, e) -> (delta(x), xi_x e)`` unless given explicitly."""
        if self.total_map is not None:
            return self.total_map
        m = level.alg.base.dim
        size = self.base_map.shape[0] + self.fib_map.shape[0]
        return SmoothField(
            level.fib.total,
            lambda y: np.concatenate([as_array(self.base_map(y[:m])), as_array(self.fib_map(y[:m]) @ y[m:])]),
            (size,),
        )


def identity_bonding(index: int, level: Level) -> Bonding:
    base = level.alg.base
    return Bonding(
        index,
        index,
        SmoothField(base, lambda x: x, (base.dim,)),
        constant_field(base, np.eye(level.alg.fiber_dim)),
        constant_field(base, np.eye(level.fib.fiber.dim)),
    )


def compose_bondings(outer: Bonding, inner: Bonding, levels) -> Bonding:
    """``outer ∘ inner``; ``inner.target`` must be ``outer.source``. ``levels`` supplies the fibrations the
    default total maps are built on when either bonding carries an explicit total map."""
    if inner.target != outer.source:
        raise ValidationError(f"Cannot compose bonding {outer.source}->{outer.target} after {inner.source}->{inner.target}")
    domain = inner.base_map.domain

    def base(x):
        return outer.base_map(inner.base_map(x))

    def alg(x):
        return outer.alg_map(inner.base_map(x)) @ inner.alg_map(x)

    def fib(x):
        return outer.fib_map(inner.base_map(x)) @ inner.fib_map(x)

    total = None
    if outer.total_map is not None or inner.total_map is not None:
        first = inner.total(levels[inner.source])
        second = outer.total(levels[outer.source])
        total = SmoothField(first.domain, lambda y: second(first(y)), second.shape)
    return Bonding(
        inner.source,
        outer.target,
        SmoothField(domain, base, outer.base_map.shape),
        SmoothField(domain, alg, (outer.alg_map.shape[0], inner.alg_map.shape[1])),
        SmoothField(domain, fib, (outer.fib_map.shape[0], inner.fib_map.shape[1])),
        total,
    )


@dataclass(frozen=True)
class Tower:
    kind: str
    levels: tuple[Level, ...]
    bondings: tuple[Bonding, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in TOWER_KINDS:
            raise ValidationError(f"Tower kind is {self.kind} but must be one of {', '.join(TOWER_KINDS)}")
        if len(self.levels) < 2:
            raise ValidationError("A tower needs at least two levels")
        explicit = {}
        for b in self.bondings:
            if not (0 <= b.source < len(self.levels) and 0 <= b.target < len(self.levels)):
                raise ValidationError(f"Bonding {b.source}->{b.target} refers to a missing level")
            if not self._forward(b.source, b.target):
                raise ValidationError(f"Bonding {b.source}->{b.target} runs against a {self.kind} tower")
            if (b.source, b.target) in explicit:
                raise ValidationError(f"Bonding {b.source}->{b.target} is given twice")
            self._check_shapes(b)
            explicit[(b.source, b.target)] = b
        for source, target in self.steps():
            if (source, target) not in explicit:
                raise ValidationError(f"Tower is missing the consecutive bonding {source}->{target}")
        object.__setattr__(self, "_explicit", explicit)

    def _forward(self, source: int, target: int) -> bool:
        return source > target if self.kind == "projective" else source < target

    def _check_shapes(self, b: Bonding) -> None:
        src, tgt = self.levels[b.source], self.levels[b.target]
        base = src.alg.base
        expected = {
            "base map": (b.base_map, (tgt.alg.base.dim,)),
            "algebroid map": (b.alg_map, (tgt.alg.fiber_dim, src.alg.fiber_dim)),
            "fibre map": (b.fib_map, (tgt.fib.fiber.dim, src.fib.fiber.dim)),
        }
        for label, (f, shape) in expected.items():
            if f.domain != base or f.shape != shape:
                raise ShapeError(f"Bonding {b.source}->{b.target}: {label} must be a {shape}-field on the source base")
        if b.total_map is not None and (b.total_map.domain != src.fib.total or b.total_map.shape != (tgt.fib.total.dim,)):
            raise ShapeError(f"Bonding {b.source}->{b.target}: total map must send the source total box to R^{tgt.fib.total.dim}")

    def steps(self) -> list[tuple[int, int]]:
        """Consecutive ``(source, target)`` pairs in map direction."""
        count = len(self.levels)
        if self.kind == "projective":
            return [(i + 1, i) for i in range(count - 1)]
        return [(i, i + 1) for i in range(count - 1)]

    def pairs(self) -> list[tuple[int, int]]:
        """Every ``(source, target)`` pair of distinct levels in map direction."""
        pairs = itertools.combinations(range(len(self.levels)), 2)
        return [(j, i) if self.kind == "projective" else (i, j) for i, j in pairs]

    def prolongation(self, index: int) -> Prolongation:
        level = self.levels[index]
        return build_prolongation(level.alg, level.fib)

    def bonding(self, source: int, target: int) -> Bonding:
        """The explicit bonding if given, otherwise the composite of consecutive ones."""
        if source == target:
            return identity_bonding(source, self.levels[source])
        if not self._forward(source, target):
            raise ValidationError(f"No bonding {source}->{target} in a {self.kind} tower")
        explicit = self._explicit.get((source, target))
        if explicit is not None:
            return explicit
        return self.derived_bonding(source, target)

    def derived_bonding(self, source: int, target: int) -> Bonding:
        """Composite of the consecutive bondings from ``source`` to ``target``."""
        step = -1 if self.kind == "projective" else 1
        result = self._explicit[(source, source + step)]
        for k in range(source + step, target, step):
            result = compose_bondings(self._explicit[(k, k + step)], result, self.levels)
        return result

    def total_map(self, b: Bonding) -> SmoothField:
        return b.total(self.levels[b.source])


def _report_triples(tower: Tower):
    count = len(tower.levels)
    for i, j, k in itertools.combinations(range(count), 3):
        yield (k, j, i) if tower.kind == "projective" else (i, j, k)


def check_bonding_laws(tower: Tower, count: int = 64, seed: int = 0, tolerance: float = 1e-10) -> CheckReport:
    """Compare every bonding ``first -> last`` with the composite through each intermediate level."""
    report = CheckReport("bonding-laws", tolerance)
    for first, mid, last in _report_triples(tower):
        direct = tower.bonding(first, last)
        via = compose_bondings(tower.bonding(mid, last), tower.bonding(first, mid), tower.levels)
        for x in tower.levels[first].alg.base.samples(count, seed):
            label = f"levels {first}->{mid}->{last}"
            report.record(max_abs(primal(direct.base_map(x) - via.base_map(x))), x, f"{label}: base map")
            report.record(max_abs(primal(direct.alg_map(x) - via.alg_map(x))), x, f"{label}: algebroid map")
            report.record(max_abs(primal(direct.fib_map(x) - via.fib_map(x))), x, f"{label}: fibre map")
    return report


@dataclass(frozen=True)
class AffineMap:
    """``y = D x + c`` recovered from a field, with its pseudo-inverse."""

    matrix: np.ndarray
    offset: np.ndarray

    @property
    def pinv(self) -> np.ndarray:
        return np.linalg.pinv(self.matrix)

    def preimage(self, y):
        return self.pinv @ (as_array(y) - self.offset)


def affine_part(f: SmoothField, samples: int = 8) -> AffineMap:
    center = f.domain.center
    D = primal(jacobian(f, center))
    c = primal(f(center)) - D @ center
    for x in f.domain.samples(samples):
        drift = max_abs(primal(f(x)) - (D @ x + c))
        if drift > AFFINE_TOLERANCE * max(1.0, max_abs(D)):
            raise ValidationError(f"Map is not affine near {x.tolist()} (defect {drift:.3e}); related sections need affine bondings")
    return AffineMap(D, c)


def _constant_matrix(f: SmoothField, samples: int = 8) -> np.ndarray:
    value = primal(f(f.domain.center))
    for x in f.domain.samples(samples):
        if max_abs(primal(f(x)) - value) > AFFINE_TOLERANCE:
            raise ValidationError("Related sections need bondings with constant fibre maps")
    return value


def related_pair(tower: Tower, b: Bonding, s: Section) -> tuple[Section, Section]:
    """A ``b``-related pair ``(source section, target section)``.

    In a projective tower ``s`` is a target-level section pulled back through the pseudo-inverse of the
    fibre map; in a direct tower ``s`` is a source-level section pushed forward along the base map."""
    src, tgt = tower.levels[b.source], tower.levels[b.target]
    Z = _constant_matrix(b.alg_map)
    if tower.kind == "projective":
        if s.domain != tgt.alg.base:
            raise ShapeError("Projective relatedness starts from a target-level section")
        Zp = np.linalg.pinv(Z)
        pulled = section(src.alg.base, lambda x: Zp @ s(b.base_map(x)), src.alg.fiber_dim)
        return pulled, s
    if s.domain != src.alg.base:
        raise ShapeError("Direct relatedness starts from a source-level section")
    base = affine_part(b.base_map)
    pushed = section(tgt.alg.base, lambda y: Z @ s(base.preimage(y)), tgt.alg.fiber_dim)
    return s, pushed


def related_sections(tower: Tower, b: Bonding, sections) -> list[tuple[Section, Section]]:
    return [related_pair(tower, b, s) for s in sections]


def _probe_sections(alg: LocalAlgebroid) -> list[Section]:
    n, m = alg.fiber_dim, alg.base.dim
    out = [constant_section(alg.base, np.eye(n)[k]) for k in range(n)]
    for i in range(m):
        for k in range(n):
            out.append(section(alg.base, lambda x, i=i, k=k: x[i] * np.eye(n)[k], n))
    return out


def check_anchored_sequence(tower: Tower, count: int = 16, seed: int = 0, tolerance: float = 1e-8) -> CheckReport:
    """Anchor compatibility and bracket compatibility of every consecutive bonding on probe pairs."""
    report = CheckReport("anchored-sequence", tolerance)
    for source, target in tower.steps():
        b = tower.bonding(source, target)
        src, tgt = tower.levels[source], tower.levels[target]
        morphism = BundleMorphism(b.base_map, b.alg_map, tgt.alg.base)
        start = tgt.alg if tower.kind == "projective" else src.alg
        pairs = related_sections(tower, b, _probe_sections(start))
        for x in src.alg.base.samples(count, seed):
            for p1, p2 in itertools.combinations(pairs, 2):
                defect = lie_morphism_defect(src.alg, tgt.alg, morphism, p1, p2, x)
                label = f"bonding {source}->{target}"
                report.record(max_abs(defect.anchor), x, f"{label}: anchor")
                report.record(defect.related_max, x, f"{label}: relatedness")
                report.record(max_abs(defect.bracket), x, f"{label}: bracket")
    logging.info(f"Anchored sequence: {report.checks} checks over {len(tower.steps())} bondings, max defect {report.max_defect:.3e}")
    return report


def check_prolong_compat(tower: Tower, count: int = 64, seed: int = 0, tolerance: float = 1e-10) -> CheckReport:
    """Every consecutive total map covers its base map and keeps the fibration box inside the next one."""
    report = CheckReport("prolongation-compatibility", tolerance)
    for source, target in tower.steps():
        b = tower.bonding(source, target)
        src, tgt = tower.levels[source], tower.levels[target]
        total = tower.total_map(b)
        m_s, m_t = src.alg.base.dim, tgt.alg.base.dim
        label = f"bonding {source}->{target}"
        for y in src.fib.total.samples(count, seed):
            image = primal(total(y))
            report.record(tgt.fib.total.excess(image), y, f"{label}: image outside the target fibration box")
            report.record(max_abs(image[:m_t] - primal(b.base_map(y[:m_s]))), y, f"{label}: total map does not cover the base map")
    return report


def check_direct_sequence(tower: Tower, count: int = 16, seed: int = 0, tolerance: float = 1e-10) -> CheckReport:
    """Injective fibre maps and the commuting square of a direct tower, plus prolongation compatibility."""
    if tower.kind != "direct":
        raise ValidationError("Direct-sequence checks need a direct tower")
    report = CheckReport("direct-sequence", tolerance)
    for source, target in tower.steps():
        b = tower.bonding(source, target)
        src = tower.levels[source]
        label = f"bonding {source}->{target}"
        for x in src.alg.base.samples(count, seed):
            rank, _ = matrix_rank(b.alg_map(x))
            report.record(float(src.alg.fiber_dim - rank), x, f"{label}: algebroid map is not injective")
            rank, _ = matrix_rank(b.fib_map(x))
            report.record(float(src.fib.fiber.dim - rank), x, f"{label}: fibre map is not injective")
    return report.merge(check_prolong_compat(tower, count, seed, tolerance))


def _lifted(tower: Tower, b: Bonding):
    src, tgt = tower.levels[b.source], tower.levels[b.target]
    phi = BundleMorphism(b.base_map, b.alg_map, tgt.alg.base)
    return prolong_morphism(tower.prolongation(b.source), tower.prolongation(b.target), phi, tower.total_map(b), samples=4)


def push_section(tower: Tower, b: Bonding, X: SmoothField) -> ModuleSection:
    """Carry a source-level prolongation section to the target level through the pseudo-inverse of the
    affine total map. The result is related to ``X`` wherever ``X`` is constant along that map's fibres."""
    src_prol, tgt_prol = tower.prolongation(b.source), tower.prolongation(b.target)
    X = as_module_section(src_prol, X)
    total = affine_part(tower.total_map(b))
    base = affine_part(b.base_map)
    D = total.matrix
    m_t = tgt_prol.alg.base.dim
    terms = []
    for f, P in X.terms:
        if f.constant is not None:
            coeff = constant_field(tgt_prol.total, f.constant)
        else:
            coeff = SmoothField(tgt_prol.total, lambda y, f=f: f(total.preimage(y)), ())
        a = section(tgt_prol.alg.base, lambda x, P=P: b.alg_map(base.preimage(x)) @ P.a(base.preimage(x)), tgt_prol.n)
        z = SmoothField(
            tgt_prol.total,
            lambda y, P=P: (D @ (src_prol.derived.anchor(total.preimage(y)) @ P(total.preimage(y))))[m_t:],
            (tgt_prol.p,),
        )
        terms.append((coeff, make_projectable(tgt_prol, a, z)))
    return ModuleSection(tgt_prol, terms)


def constant_along_fibres(tower: Tower, b: Bonding, X: SmoothField) -> ModuleSection:
    """Precompose ``X`` with the affine projection onto a cross-section of the total map, so the result
    is related to its pushed image under ``b``."""
    prol = tower.prolongation(b.source)
    X = as_module_section(prol, X)
    total = affine_part(tower.total_map(b))
    base = affine_part(b.base_map)

    def project(y):
        return total.pinv @ (total.matrix @ as_array(y))

    def project_base(x):
        return base.pinv @ (base.matrix @ as_array(x))

    terms = []
    for f, P in X.terms:
        coeff = f if f.constant is not None else SmoothField(prol.total, lambda y, f=f: f(project(y)), ())
        a = section(prol.alg.base, lambda x, P=P: P.a(project_base(x)), prol.n)
        z = SmoothField(prol.total, lambda y, P=P: P.z(project(y)), (prol.p,))
        terms.append((coeff, make_projectable(prol, a, z)))
    return ModuleSection(prol, terms)


@dataclass(frozen=True)
class LimitBracketDefect:
    related: float
    bracket: np.ndarray

    def max(self) -> float:
        return max(self.related, max_abs(self.bracket))


def limit_bracket_defect(tower: Tower, source: int, target: int, X: SmoothField, Y: SmoothField, at) -> LimitBracketDefect:
    """Compare the lifted image of ``[X, Y]`` at ``at`` with the bracket of the pushed sections at its image."""
    b = tower.bonding(source, target)
    src_prol, tgt_prol = tower.prolongation(source), tower.prolongation(target)
    lifted = _lifted(tower, b).morphism
    image = lifted.base_map(at)
    if not tgt_prol.total.interior(image):
        raise DomainError(f"Image {primal(image).tolist()} is not interior to level {target}")
    Xt, Yt = push_section(tower, b, X), push_section(tower, b, Y)
    T = lifted.fiber_map(at)
    related = max(max_abs(primal(T @ X(at) - Xt(image))), max_abs(primal(T @ Y(at) - Yt(image))))
    br = T @ prolong_bracket(src_prol, X, Y)(at) - prolong_bracket(tgt_prol, Xt, Yt)(image)
    return LimitBracketDefect(related, primal(br))


def make_thread(tower: Tower, point) -> list[np.ndarray]:
    """A compatible family of base points starting from ``point`` at the top level (projective) or the
    bottom level (direct)."""
    count = len(tower.levels)
    thread = [None] * count
    start = count - 1 if tower.kind == "projective" else 0
    thread[start] = primal(as_array(point))
    for source, target in (tower.steps()[::-1] if tower.kind == "projective" else tower.steps()):
        thread[target] = primal(tower.bonding(source, target).base_map(thread[source]))
    return thread


def thread_defect(tower: Tower, thread) -> float:
    if len(thread) != len(tower.levels):
        raise ShapeError(f"Thread has {len(thread)} points for {len(tower.levels)} levels")
    worst = 0.0
    for source, target in tower.steps():
        b = tower.bonding(source, target)
        worst = max(worst, max_abs(primal(b.base_map(thread[source])) - primal(as_array(thread[target]))))
    return worst


@dataclass(frozen=True)
class JacobianCompat:
    coherence: float
    jacobian: float

    def max(self) -> float:
        return max(self.coherence, self.jacobian)


def limit_jacobian_compat(tower: Tower, maps, codomain_maps, thread) -> JacobianCompat:
    """For level maps ``f_i`` intertwined by constant codomain maps ``gamma`` along consecutive bondings:
    the coherence ``gamma f_s - f_t ∘ delta`` and the chain-rule defect of their Jacobians on a thread."""
    steps = tower.steps()
    if len(maps) != len(tower.levels) or len(codomain_maps) != len(steps):
        raise ShapeError("Need one map per level and one codomain map per consecutive bonding")
    coherence, jac = 0.0, 0.0
    for (source, target), gamma in zip(steps, codomain_maps):
        b = tower.bonding(source, target)
        gamma = np.asarray(gamma, dtype=float)
        x = thread[source]
        fs, ft = maps[source], maps[target]
        coherence = max(coherence, max_abs(primal(gamma @ fs(x) - ft(b.base_map(x)))))
        lhs = gamma @ jacobian(fs, x)
        rhs = jacobian(ft, b.base_map(x)) @ jacobian(b.base_map, x)
        jac = max(jac, max_abs(primal(lhs - rhs)))
    if coherence > 1e-10:
        logging.warning(f"Level maps are not coherent along the tower (defect {coherence:.3e})")
    return JacobianCompat(coherence, jac)
