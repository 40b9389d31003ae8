"""Polynomial fields: the encoding scenario files use for anchors, structure fields and Christoffel data,
and the random sections the test suites differentiate."""

import itertools
from dataclasses import dataclass

import numpy as np

from algebroidcheck.jets import Box, SmoothField
from algebroidcheck.utils import ConfigError


@dataclass(frozen=True)
class Monomial:
    coeff: float
    powers: tuple[int, ...]
    out: tuple[int, ...]
    paired: bool = False

    def value(self, x):
        v = self.coeff
        for i, p in enumerate(self.powers):
            if p:
                v = v * x[i] ** p
        return v


def poly_field(domain: Box, shape: tuple[int, ...], terms: list[Monomial]) -> SmoothField:
    """Sum of monomials; a ``paired`` term adds to ``out`` and subtracts from ``out`` with its last two
    indices swapped, so structure fields built from paired terms are antisymmetric by construction."""
    shape = tuple(shape)
    terms = tuple(terms)

    def fn(x):
        out = np.full(shape, 0.0, dtype=object)
        for t in terms:
            v = t.value(x)
            out[t.out] = out[t.out] + v
            if t.paired:
                swapped = t.out[:-2] + (t.out[-1], t.out[-2])
                out[swapped] = out[swapped] - v
        return out

    constant = None
    if all(not any(t.powers) for t in terms):
        constant = fn(np.zeros(domain.dim)).astype(float)
    return SmoothField(domain, fn, shape, constant)


def decode_poly(domain: Box, shape: tuple[int, ...], raw, where: str) -> SmoothField:
    """Build a polynomial field from its scenario-file form, a list of
    ``{"coeff", "powers", "outIndex" | "outPair"}`` objects."""
    if not isinstance(raw, list):
        raise ConfigError(f"{where}: expected a list of polynomial terms")
    terms = []
    for n, term in enumerate(raw):
        at = f"{where}[{n}]"
        if not isinstance(term, dict):
            raise ConfigError(f"{at}: expected an object")
        coeff = term.get("coeff")
        if not isinstance(coeff, (int, float)) or isinstance(coeff, bool):
            raise ConfigError(f"{at}.coeff: expected a number")
        powers = term.get("powers", [0] * domain.dim)
        if (
            not isinstance(powers, list)
            or len(powers) != domain.dim
            or not all(isinstance(p, int) and not isinstance(p, bool) and p >= 0 for p in powers)
        ):
            raise ConfigError(f"{at}.powers: expected {domain.dim} non-negative integers")
        if ("outIndex" in term) == ("outPair" in term):
            raise ConfigError(f"{at}: exactly one of outIndex or outPair is required")
        paired = "outPair" in term
        out = term["outPair"] if paired else term["outIndex"]
        if isinstance(out, int) and not isinstance(out, bool):
            out = [out]
        if not isinstance(out, list) or len(out) != len(shape):
            raise ConfigError(f"{at}: output index must have {len(shape)} entries")
        for axis, (i, size) in enumerate(zip(out, shape)):
            if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < size:
                raise ConfigError(f"{at}: output index entry {axis} must lie in [0, {size})")
        if paired:
            if len(shape) < 2:
                raise ConfigError(f"{at}.outPair: needs at least two output axes")
            if out[-1] == out[-2]:
                raise ConfigError(f"{at}.outPair: the paired indices must differ")
        terms.append(Monomial(float(coeff), tuple(powers), tuple(out), paired))
    return poly_field(domain, shape, terms)


def random_polynomial(rng: np.random.Generator, domain: Box, shape: tuple[int, ...], degree: int = 2) -> SmoothField:
    """Every monomial of total degree up to ``degree`` in every output slot, coefficients uniform on [-1, 1]."""
    shape = tuple(shape)
    exponents = [p for p in itertools.product(range(degree + 1), repeat=domain.dim) if sum(p) <= degree]
    terms = [
        Monomial(float(rng.uniform(-1.0, 1.0)), powers, out)
        for out in itertools.product(*(range(s) for s in shape))
        for powers in exponents
    ]
    return poly_field(domain, shape, terms)
