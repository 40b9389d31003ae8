import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """A point lies outside the box it must live in, or a map escapes its target box."""


class ShapeError(ValueError):
    """Dimensions of fields, vectors or boxes do not agree."""


class ValidationError(ValueError):
    """A constructor precondition does not hold for the given data."""


class ConfigError(ValueError):
    """A scenario file cannot be parsed, violates the schema or references an unknown name."""


class ConsistencyError(RuntimeError):
    """Two objects that must agree by construction do not."""


def max_abs(values) -> float:
    """Largest absolute entry of a float array (0.0 for empty input, inf for NaN)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0
    if np.isnan(arr).any():
        return math.inf
    return float(np.max(np.abs(arr)))


@dataclass
class Defect:
    value: float
    point: tuple[float, ...] = ()
    detail: str = ""


@dataclass
class CheckReport:
    """Running max-merge of defects for one named check.

    Aggregation is commutative and associative: merging reports in any order gives the same max defect
    and the same worst sample (ties are broken by the detail and point, not by arrival order)."""

    name: str
    tolerance: float
    checks: int = 0
    max_defect: float = 0.0
    worst: Defect | None = None
    errors: list[str] = field(default_factory=list)

    def record(self, value: float, point=(), detail: str = "") -> None:
        value = math.inf if value is None or math.isnan(value) else float(value)
        point = tuple(float(p) for p in np.ravel(np.asarray(point, dtype=float)))
        self.checks += 1
        self._offer(Defect(value, point, detail))

    def fail(self, detail: str) -> None:
        self.errors.append(detail)

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.checks += other.checks
        self.errors.extend(other.errors)
        if other.worst is not None:
            self._offer(other.worst)
        return self

    def _offer(self, defect: Defect) -> None:
        if self.worst is None or _rank(defect) > _rank(self.worst):
            self.worst = defect
            self.max_defect = defect.value

    @property
    def passed(self) -> bool:
        return not self.errors and self.max_defect <= self.tolerance


def _rank(defect: Defect):
    return defect.value, defect.detail, defect.point
