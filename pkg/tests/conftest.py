from pathlib import Path

import numpy as np
import pytest

try:
    from algebroidcheck.algebroid import builtin
    from algebroidcheck.jets import Box
    from algebroidcheck.prolong import Fibration, build_prolongation, tangent_prolongation
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck.algebroid import builtin
    from algebroidcheck.jets import Box
    from algebroidcheck.prolong import Fibration, build_prolongation, tangent_prolongation

SCENARIOS = Path(__file__).parent / "scenarios"
BUNDLED = Path(__file__).parent.parent / "algebroidcheck" / "scenarios"


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


@pytest.fixture(scope="module")
def tangent():
    return builtin("tangent")


@pytest.fixture(scope="module")
def so3():
    return builtin("lie-algebra:so3")


@pytest.fixture(scope="module")
def rank_drop():
    return builtin("rank-drop")


@pytest.fixture(scope="module")
def non_jacobi():
    return builtin("non-jacobi")


@pytest.fixture(scope="module")
def rotation():
    return builtin("action:rotation")


@pytest.fixture(scope="module")
def tangent_lift(tangent):
    return tangent_prolongation(tangent)


@pytest.fixture(scope="module")
def so3_lift(so3):
    return build_prolongation(so3, Fibration(so3.base, Box.cube(2)))


@pytest.fixture(scope="module")
def rotation_lift(rotation):
    return build_prolongation(rotation, Fibration(rotation.base, Box((0.0,), (1.0,))))
