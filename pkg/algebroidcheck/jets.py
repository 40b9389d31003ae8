"""Forward-mode jets and smooth fields on boxes.

Every derivative in this package is computed by pushing first-order jets through a field's evaluation
routine. Each differentiation gets a fresh tag; a jet only carries the derivative belonging to its own
tag and treats jets of older tags as constants. Jets nest, so a field evaluated on jets of an outer
differentiation can itself be differentiated again, which is how brackets of brackets are computed
without mixing up the two derivatives.

Fields are plain callables over numpy arrays whose entries are either floats or jets, so every formula is
written once and works for both.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from algebroidcheck.utils import DomainError, ShapeError, ValidationError

_tags = itertools.count(1)


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    return x


def _is_scalar(x) -> bool:
    return isinstance(x, (Jet, int, float, np.generic))


def _tag_of(x) -> int:
    return x.tag if isinstance(x, Jet) else 0


def _split(x, tag):
    if isinstance(x, Jet) and x.tag == tag:
        return x.value, x.first
    return _plain(x), 0.0


class Jet:
    """A value together with one directional derivative, labelled by the differentiation it belongs to."""

    __slots__ = ("tag", "value", "first")

    def __init__(self, tag: int, value, first):
        self.tag = tag
        self.value = _plain(value)
        self.first = _plain(first)

    def __repr__(self):
        return f"Jet({self.tag}, {self.value!r}, {self.first!r})"

    def __neg__(self):
        return Jet(self.tag, -self.value, -self.first)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        t = max(self.tag, _tag_of(other))
        av, ad = _split(self, t)
        bv, bd = _split(other, t)
        return Jet(t, av + bv, ad + bd)

    __radd__ = __add__

    def __sub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        t = max(self.tag, _tag_of(other))
        av, ad = _split(self, t)
        bv, bd = _split(other, t)
        return Jet(t, av - bv, ad - bd)

    def __rsub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        t = max(self.tag, _tag_of(other))
        av, ad = _split(self, t)
        bv, bd = _split(other, t)
        return Jet(t, bv - av, bd - ad)

    def __mul__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        t = max(self.tag, _tag_of(other))
        av, ad = _split(self, t)
        bv, bd = _split(other, t)
        return Jet(t, av * bv, av * bd + ad * bv)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        t = max(self.tag, _tag_of(other))
        av, ad = _split(self, t)
        bv, bd = _split(other, t)
        return Jet(t, av / bv, (ad * bv - av * bd) / (bv * bv))

    def __rtruediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        t = max(self.tag, _tag_of(other))
        av, ad = _split(other, t)
        bv, bd = _split(self, t)
        return Jet(t, av / bv, (ad * bv - av * bd) / (bv * bv))

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(p * log(self))
        p = _plain(p)
        if p == 0:
            return Jet(self.tag, 1.0, 0.0)
        return Jet(self.tag, self.value**p, p * self.value ** (p - 1) * self.first)


def _elementwise(scalar_fn):
    def wrapped(x):
        if isinstance(x, np.ndarray):
            return as_array([wrapped(v) for v in x.flat]).reshape(x.shape)
        return scalar_fn(x)

    wrapped.__name__ = scalar_fn.__name__
    wrapped.__doc__ = scalar_fn.__doc__
    return wrapped


@_elementwise
def sin(x):
    if isinstance(x, Jet):
        return Jet(x.tag, sin(x.value), cos(x.value) * x.first)
    return math.sin(x)


@_elementwise
def cos(x):
    if isinstance(x, Jet):
        return Jet(x.tag, cos(x.value), -sin(x.value) * x.first)
    return math.cos(x)


@_elementwise
def exp(x):
    if isinstance(x, Jet):
        e = exp(x.value)
        return Jet(x.tag, e, e * x.first)
    return math.exp(x)


@_elementwise
def log(x):
    if isinstance(x, Jet):
        return Jet(x.tag, log(x.value), x.first / x.value)
    return math.log(x)


@_elementwise
def sqrt(x):
    if isinstance(x, Jet):
        s = sqrt(x.value)
        return Jet(x.tag, s, x.first / (2.0 * s))
    return math.sqrt(x)


def as_array(values) -> np.ndarray:
    """An object array if any entry is a jet, otherwise a float array."""
    arr = np.asarray(values, dtype=object)
    if any(isinstance(v, Jet) for v in arr.flat):
        return arr
    return arr.astype(float)


def primal(x):
    """Strip every jet layer, leaving floats."""
    if isinstance(x, np.ndarray):
        if x.dtype != object:
            return x
        return np.array([primal(v) for v in x.flat], dtype=float).reshape(x.shape)
    while isinstance(x, Jet):
        x = x.value
    return float(x)


@dataclass(frozen=True)
class Box:
    """An axis-aligned box, the chart domain of every field."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        if len(self.lower) != len(self.upper):
            raise ShapeError(f"Box bounds have lengths {len(self.lower)} and {len(self.upper)}")
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not lo < hi:
                raise ValidationError(f"Box coordinate {i} has empty interior: [{lo}, {hi}]")

    @classmethod
    def cube(cls, dim: int, lo: float = -1.0, hi: float = 1.0) -> "Box":
        return cls((lo,) * dim, (hi,) * dim)

    @classmethod
    def from_bounds(cls, bounds) -> "Box":
        return cls(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> np.ndarray:
        return (np.array(self.lower) + np.array(self.upper)) / 2.0

    @property
    def bounds(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in zip(self.lower, self.upper)]

    def product(self, other: "Box") -> "Box":
        return Box(self.lower + other.lower, self.upper + other.upper)

    def contains(self, x) -> bool:
        x = primal(np.asarray(x, dtype=object) if not isinstance(x, np.ndarray) else x)
        if np.shape(x) != (self.dim,):
            raise ShapeError(f"Point of shape {np.shape(x)} checked against a box of dimension {self.dim}")
        return bool(np.all(x >= np.array(self.lower)) and np.all(x <= np.array(self.upper)))

    def interior(self, x) -> bool:
        x = primal(np.asarray(x, dtype=object) if not isinstance(x, np.ndarray) else x)
        if np.shape(x) != (self.dim,):
            raise ShapeError(f"Point of shape {np.shape(x)} checked against a box of dimension {self.dim}")
        return bool(np.all(x > np.array(self.lower)) and np.all(x < np.array(self.upper)))

    def excess(self, x) -> float:
        """How far a point lies outside the box, 0.0 when inside."""
        x = primal(as_array(x))
        over = np.maximum(np.array(self.lower) - x, x - np.array(self.upper))
        return float(max(0.0, np.max(over)))

    def samples(self, count: int = 64, seed: int = 0, margin: float = 0.01) -> np.ndarray:
        """Deterministic low-discrepancy points, kept ``margin`` of each edge away from the boundary."""
        if count < 1:
            raise ValidationError(f"Sample count must be positive, got {count}")
        lo = np.array(self.lower)
        edge = np.array(self.upper) - lo
        unit = qmc.Halton(d=self.dim, scramble=True, seed=seed).random(count)
        return lo + edge * margin + unit * edge * (1.0 - 2.0 * margin)


def _as_point(x, dim: int) -> np.ndarray:
    x = as_array(x)
    if x.shape != (dim,):
        raise ShapeError(f"Expected a point of shape ({dim},), got {x.shape}")
    return x


class SmoothField:
    """A smooth map from a box into a fixed-shape array, evaluated over floats or jets.

    ``constant`` is set for fields known not to depend on the point; consumers use it to skip
    derivatives that are identically zero."""

    def __init__(self, domain: Box, fn: Callable, shape: tuple[int, ...] = (), constant=None):
        self.domain = domain
        self.fn = fn
        self.shape = tuple(shape)
        self.constant = constant

    def __repr__(self):
        return f"SmoothField(dim={self.domain.dim}, shape={self.shape})"

    def __call__(self, x) -> np.ndarray:
        x = _as_point(x, self.domain.dim)
        out = as_array(self.fn(x))
        if out.shape != self.shape:
            raise ShapeError(f"Field declared shape {self.shape} but produced {out.shape}")
        return out

    def _combine(self, other, op, name):
        if isinstance(other, SmoothField):
            if other.domain != self.domain:
                raise ShapeError(f"Cannot {name} fields on different boxes")
            shape = np.broadcast_shapes(self.shape, other.shape)
            constant = None
            if self.constant is not None and other.constant is not None:
                constant = op(self.constant, other.constant)
            return SmoothField(self.domain, lambda x: op(self(x), other(x)), shape, constant)
        if not _is_scalar(other):
            return NotImplemented
        constant = None if self.constant is None else op(self.constant, other)
        return SmoothField(self.domain, lambda x: op(self(x), other), self.shape, constant)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, "add")

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b, "subtract")

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b, "multiply")

    def __rmul__(self, other):
        return self._combine(other, lambda a, b: b * a, "multiply")

    def __neg__(self):
        constant = None if self.constant is None else -self.constant
        return SmoothField(self.domain, lambda x: -self(x), self.shape, constant)

    def component(self, index) -> "SmoothField":
        index = tuple(np.atleast_1d(index))
        shape = np.empty(self.shape)[index].shape
        constant = None if self.constant is None else np.asarray(self.constant)[index]
        return SmoothField(self.domain, lambda x: self(x)[index], shape, constant)


def constant_field(domain: Box, value) -> SmoothField:
    value = as_array(value)
    return SmoothField(domain, lambda x: value, value.shape, constant=value)


def compose(outer: SmoothField, inner: SmoothField) -> SmoothField:
    """``outer ∘ inner``; raises DomainError where ``inner`` leaves the domain of ``outer``."""
    if inner.shape != (outer.domain.dim,):
        raise ShapeError(f"Cannot compose: inner field has shape {inner.shape}, outer expects ({outer.domain.dim},)")

    def fn(x):
        y = inner(x)
        if not outer.domain.contains(y):
            raise DomainError(f"Point {primal(y).tolist()} is outside the box {outer.domain.bounds}")
        return outer(y)

    return SmoothField(inner.domain, fn, outer.shape)


def _extract(out: np.ndarray, tag: int) -> np.ndarray:
    return as_array([v.first if isinstance(v, Jet) and v.tag == tag else 0.0 for v in out.flat]).reshape(out.shape)


def directional(field: SmoothField, x, v) -> np.ndarray:
    """Exact directional derivative ``d field_x(v)`` at an interior point."""
    x = _as_point(x, field.domain.dim)
    v = _as_point(v, field.domain.dim)
    if not field.domain.interior(x):
        raise DomainError(f"Point {primal(x).tolist()} is not interior to the box {field.domain.bounds}")
    tag = next(_tags)
    seeded = np.empty(x.shape, dtype=object)
    for i in range(x.shape[0]):
        seeded[i] = Jet(tag, x[i], v[i])
    return _extract(field(seeded), tag)


def jacobian(field: SmoothField, x) -> np.ndarray:
    """Derivative matrix with the input coordinate as the last axis."""
    dim = field.domain.dim
    columns = [directional(field, x, np.eye(dim)[j]) for j in range(dim)]
    return as_array(np.stack(columns, axis=-1))


def second_directional(field: SmoothField, x, u, v) -> np.ndarray:
    """``d²field_x(u, v)`` through nested jets."""
    inner = SmoothField(field.domain, lambda y: directional(field, y, u), field.shape)
    return directional(inner, x, v)


def finite_difference(field: SmoothField, x, v, step: float = 1e-6) -> np.ndarray:
    """Central difference quotient along ``v``, the numerical cross-check for ``directional``."""
    x = primal(_as_point(x, field.domain.dim))
    v = primal(_as_point(v, field.domain.dim))
    return (primal(field(x + step * v)) - primal(field(x - step * v))) / (2.0 * step)
