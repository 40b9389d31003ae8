import json
from pathlib import Path

import pytest

try:
    from algebroidcheck import load_config, validate
    from algebroidcheck.utils import ConfigError
    from algebroidcheck.validator import cli
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck import load_config, validate
    from algebroidcheck.utils import ConfigError
    from algebroidcheck.validator import cli

SCENARIOS = Path(__file__).parent / "scenarios"
BUNDLED = Path(__file__).parent.parent / "algebroidcheck" / "scenarios"


def scenario(instances, suites=("antisymmetry",), **extra) -> str:
    return json.dumps({"name": "inline", "instances": instances, "suites": list(suites), **extra})


PLANE = {"kind": "algebroid", "builtin": "tangent"}


def test_validator_valid():
    s = validate(BUNDLED / "tangent-basic.json")
    assert s.name == "tangent-basic"
    assert list(s.instances) == ["tangent"]
    assert [spec.name for spec in s.suites] == ["antisymmetry", "leibniz", "jacobi", "de-rham"]
    assert (s.sampling.seed, s.sampling.count, s.sampling.margin) == (0, 64, 0.01)


@pytest.mark.parametrize("path", sorted(BUNDLED.glob("*.json")), ids=lambda p: p.stem)
def test_bundled_scenarios_validate(path):
    s = validate(path)
    assert s.instances and s.suites


def test_validator_invalid_01():
    with pytest.raises(ConfigError) as e:
        validate(SCENARIOS / "missing-reference.json")
    assert str(e.value) == "instances.lift.algebroid: unknown instance ghost"


def test_validator_invalid_02():
    with pytest.raises(ConfigError) as e:
        validate(SCENARIOS / "non-antisymmetric.json")
    assert str(e.value).startswith("instances.lopsided: Structure field is not antisymmetric")


def test_validator_invalid_03():
    with pytest.raises(ConfigError) as e:
        validate(SCENARIOS / "bad-json.json")
    assert "invalid JSON" in str(e.value)


def test_validator_invalid_04():
    with pytest.raises(ConfigError) as e:
        validate(SCENARIOS / "scrambled-bonding.json")
    assert str(e.value) == "instances.upside-down: Bonding 0->1 runs against a projective tower"


def test_validator_missing_file():
    with pytest.raises(ConfigError) as e:
        validate(SCENARIOS / "nowhere.json")
    assert "not found" in str(e.value)


@pytest.mark.parametrize(
    "text, message",
    [
        ("[]", "expected a JSON object"),
        (scenario({}), "instances: expected a non-empty object"),
        (scenario({"plane": PLANE}, suites=()), "expected a non-empty list of suites"),
        (scenario({"plane": PLANE}, suites=("curvature",)), "unknown suite curvature"),
        (scenario({"plane": {"kind": "groupoid"}}), "is not one of algebroid"),
        (scenario({"plane": {"kind": "algebroid", "builtin": "hyperbolic"}}), "unknown builtin hyperbolic"),
        (scenario({"plane": PLANE}, suites=({"name": "jacobi", "tolerance": 0},)), "must be positive"),
        (scenario({"plane": PLANE}, suites=({"name": "jacobi", "instances": ["other"]},)), "unknown instance other"),
        (scenario({"plane": PLANE}, suites=({"name": "jacobi", "instances": "plane"},)), "expected a list"),
        (scenario({"plane": PLANE}, sampling={"margin": 0.5}), "must lie in [0, 0.5)"),
        (scenario({"plane": PLANE}, sampling={"count": 0}), "sampling.count"),
        (scenario({"plane": {"kind": "algebroid", "base": {"bounds": [[1, -1]]}, "fiberDim": 1}}), "lower bound"),
        (
            scenario({"plane": PLANE, "lift": {"kind": "prolongation", "algebroid": "plane", "fiber": {"bounds": []}}}),
            "non-empty list",
        ),
        (
            scenario(
                {
                    "plane": PLANE,
                    "lift": {"kind": "prolongation", "algebroid": "plane", "fiber": {"bounds": [[-1, 1]]}},
                    "twisted": {"kind": "connection", "prolongation": "lift", "christoffel": [], "linear": []},
                }
            ),
            "exactly one of christoffel or linear",
        ),
        (
            scenario({"plane": PLANE, "bad": {"kind": "connection", "prolongation": "plane", "linear": []}}),
            "instance plane is not a prolongation",
        ),
    ],
)
def test_load_config_errors(text, message):
    with pytest.raises(ConfigError) as e:
        load_config(text)
    assert message in str(e.value)


def test_inline_instances_share_references():
    text = scenario(
        {
            "plane": PLANE,
            "lift": {"kind": "prolongation", "algebroid": "plane", "fiber": {"bounds": [[-1, 1], [-1, 1]]}},
            "flat": {"kind": "connection", "prolongation": "lift", "linear": []},
        },
        suites=("connection",),
    )
    s = load_config(text)
    assert s.instances["lift"].alg is s.instances["plane"]
    assert s.instances["flat"].prol is s.instances["lift"]


def test_cli(capsys):
    assert cli([str(BUNDLED / "tangent-basic.json")]) == 0
    assert capsys.readouterr().out.strip() == "tangent-basic: 1 instances, 4 suites"
    assert cli([str(SCENARIOS / "missing-reference.json")]) == 2
    assert "unknown instance ghost" in capsys.readouterr().err
