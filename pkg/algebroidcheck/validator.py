"""Validate an algebroidcheck scenario file and build the objects it describes.

A scenario is a JSON document naming algebroid, prolongation, connection and tower instances, the check
suites to run over them and the sampling settings. Validation parses the file, checks it against the
schema, resolves references between instances and constructs every instance, so any structural problem
is reported before a single suite runs.

~$ python validator.py {SCENARIO_FILE_PATH}"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    from algebroidcheck import __version__
    from algebroidcheck.algebroid import BUILTINS, builtin, make_algebroid
    from algebroidcheck.connect import from_linear_connection, make_connection
    from algebroidcheck.jets import Box, SmoothField
    from algebroidcheck.polynomial import decode_poly
    from algebroidcheck.prolong import Fibration, build_prolongation
    from algebroidcheck.suites import SUITES
    from algebroidcheck.towers import Bonding, Level, Tower
    from algebroidcheck.utils import ConfigError, ConsistencyError
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck import __version__
    from algebroidcheck.algebroid import BUILTINS, builtin, make_algebroid
    from algebroidcheck.connect import from_linear_connection, make_connection
    from algebroidcheck.jets import Box, SmoothField
    from algebroidcheck.polynomial import decode_poly
    from algebroidcheck.prolong import Fibration, build_prolongation
    from algebroidcheck.suites import SUITES
    from algebroidcheck.towers import Bonding, Level, Tower
    from algebroidcheck.utils import ConfigError, ConsistencyError

INSTANCE_KINDS = ("algebroid", "prolongation", "connection", "tower")


@dataclass(frozen=True)
class SuiteSpec:
    name: str
    tolerance: float | None = None
    instances: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Sampling:
    seed: int = 0
    count: int = 64
    margin: float = 0.01


@dataclass(frozen=True)
class Scenario:
    name: str
    instances: dict = field(default_factory=dict)
    suites: tuple[SuiteSpec, ...] = ()
    sampling: Sampling = Sampling()
    path: Path | None = None


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    if key not in obj:
        raise ConfigError(f"{where}: missing required key {key}")
    return obj[key]


def _number(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number")
    return float(value)


def _integer(value, where: str, minimum: int = 0) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{where}: expected an integer of at least {minimum}")
    return value


def _box(raw, where: str) -> Box:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object with bounds")
    bounds = _require(raw, "bounds", where)
    if not isinstance(bounds, list) or not bounds:
        raise ConfigError(f"{where}.bounds: expected a non-empty list of [lower, upper] pairs")
    for i, pair in enumerate(bounds):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"{where}.bounds[{i}]: expected [lower, upper]")
        lo, hi = _number(pair[0], f"{where}.bounds[{i}]"), _number(pair[1], f"{where}.bounds[{i}]")
        if not lo < hi:
            raise ConfigError(f"{where}.bounds[{i}]: lower bound must be below the upper bound")
    if "dim" in raw and raw["dim"] != len(bounds):
        raise ConfigError(f"{where}.dim: {raw['dim']} disagrees with {len(bounds)} bounds")
    return Box.from_bounds(bounds)


def _matrix(raw, rows: int, cols: int, where: str) -> np.ndarray:
    try:
        value = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a numeric matrix")
    if value.shape != (rows, cols):
        raise ConfigError(f"{where}: expected shape ({rows}, {cols}), got {value.shape}")
    return value


def _vector(raw, size: int, where: str) -> np.ndarray:
    try:
        value = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a numeric vector")
    if value.shape != (size,):
        raise ConfigError(f"{where}: expected {size} entries, got shape {value.shape}")
    return value


class _Builder:
    def __init__(self, raw: dict):
        self.raw = raw
        self.built = {}
        self.building = []

    def get(self, name: str, kind: str, where: str):
        if not isinstance(name, str) or name not in self.raw:
            raise ConfigError(f"{where}: unknown instance {name}")
        if not isinstance(self.raw[name], dict) or self.raw[name].get("kind") != kind:
            raise ConfigError(f"{where}: instance {name} is not a {kind}")
        return self.build(name)

    def build(self, name: str):
        if name in self.built:
            return self.built[name]
        if name in self.building:
            raise ConfigError(f"instances.{name}: circular reference through {' -> '.join(self.building + [name])}")
        self.building.append(name)
        spec = self.raw[name]
        where = f"instances.{name}"
        if not isinstance(spec, dict):
            raise ConfigError(f"{where}: expected an object")
        kind = _require(spec, "kind", where)
        if kind not in INSTANCE_KINDS:
            raise ConfigError(f"{where}.kind: {kind} is not one of {', '.join(INSTANCE_KINDS)}")
        try:
            instance = getattr(self, f"_{kind}")(spec, where, name)
        except ConfigError:
            raise
        except (ValueError, ConsistencyError) as e:
            raise ConfigError(f"{where}: {e}") from e
        self.building.pop()
        self.built[name] = instance
        return instance

    def _algebroid(self, spec: dict, where: str, name: str):
        if "builtin" in spec:
            key = spec["builtin"]
            if key not in BUILTINS:
                raise ConfigError(f"{where}.builtin: unknown builtin {key}; must be one of {', '.join(BUILTINS)}")
            base = _box(spec["base"], f"{where}.base") if "base" in spec else None
            return builtin(key, base)
        base = _box(_require(spec, "base", where), f"{where}.base")
        n = _integer(_require(spec, "fiberDim", where), f"{where}.fiberDim", 1)
        anchor = decode_poly(base, (base.dim, n), spec.get("anchor", []), f"{where}.anchor")
        structure = decode_poly(base, (n, n, n), spec.get("structure", []), f"{where}.structure")
        claims = spec.get("claimsJacobi", False)
        if not isinstance(claims, bool):
            raise ConfigError(f"{where}.claimsJacobi: expected true or false")
        return make_algebroid(base, n, anchor, structure, claims, name)

    def _prolongation(self, spec: dict, where: str, name: str):
        alg = self.get(_require(spec, "algebroid", where), "algebroid", f"{where}.algebroid")
        fiber = _box(_require(spec, "fiber", where), f"{where}.fiber")
        return build_prolongation(alg, Fibration(alg.base, fiber))

    def _connection(self, spec: dict, where: str, name: str):
        prol = self.get(_require(spec, "prolongation", where), "prolongation", f"{where}.prolongation")
        if ("christoffel" in spec) == ("linear" in spec):
            raise ConfigError(f"{where}: exactly one of christoffel or linear is required")
        if "christoffel" in spec:
            data = decode_poly(prol.total, (prol.p, prol.n), spec["christoffel"], f"{where}.christoffel")
            return make_connection(prol, data)
        m = prol.alg.base.dim
        gamma = decode_poly(prol.alg.base, (prol.p, m, prol.p), spec["linear"], f"{where}.linear")
        return from_linear_connection(prol, gamma)

    def _tower(self, spec: dict, where: str, name: str):
        direction = _require(spec, "direction", where)
        raw_levels = _require(spec, "levels", where)
        if not isinstance(raw_levels, list):
            raise ConfigError(f"{where}.levels: expected a list")
        levels = []
        for i, raw in enumerate(raw_levels):
            at = f"{where}.levels[{i}]"
            alg = self.get(_require(raw, "algebroid", at), "algebroid", f"{at}.algebroid")
            levels.append(Level(alg, Fibration(alg.base, _box(_require(raw, "fiber", at), f"{at}.fiber"))))
        bondings = []
        for i, raw in enumerate(_require(spec, "bondings", where)):
            at = f"{where}.bondings[{i}]"
            s = _integer(_require(raw, "source", at), f"{at}.source")
            t = _integer(_require(raw, "target", at), f"{at}.target")
            if s >= len(levels) or t >= len(levels):
                raise ConfigError(f"{at}: refers to a missing level")
            src, tgt = levels[s], levels[t]
            base = src.alg.base
            T = _matrix(_require(raw, "base", at), tgt.alg.base.dim, base.dim, f"{at}.base")
            c = _vector(raw.get("offset", [0.0] * tgt.alg.base.dim), tgt.alg.base.dim, f"{at}.offset")
            Z = _matrix(_require(raw, "algebroid", at), tgt.alg.fiber_dim, src.alg.fiber_dim, f"{at}.algebroid")
            X = _matrix(_require(raw, "fiber", at), tgt.fib.fiber.dim, src.fib.fiber.dim, f"{at}.fiber")
            bondings.append(
                Bonding(
                    s,
                    t,
                    SmoothField(base, lambda x, T=T, c=c: T @ x + c, (T.shape[0],)),
                    SmoothField(base, lambda x, Z=Z: Z, Z.shape, constant=Z),
                    SmoothField(base, lambda x, X=X: X, X.shape, constant=X),
                )
            )
        return Tower(direction, tuple(levels), tuple(bondings))


def _suites(raw, instances: dict, where: str = "suites") -> tuple[SuiteSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: expected a non-empty list of suites")
    out = []
    for i, item in enumerate(raw):
        at = f"{where}[{i}]"
        if isinstance(item, str):
            item = {"name": item}
        if not isinstance(item, dict):
            raise ConfigError(f"{at}: expected a suite name or object")
        name = _require(item, "name", at)
        if name not in SUITES:
            raise ConfigError(f"{at}.name: unknown suite {name}; must be one of {', '.join(SUITES)}")
        tolerance = None
        if "tolerance" in item:
            tolerance = _number(item["tolerance"], f"{at}.tolerance")
            if tolerance <= 0:
                raise ConfigError(f"{at}.tolerance: must be positive")
        selected = None
        if "instances" in item:
            if not isinstance(item["instances"], list):
                raise ConfigError(f"{at}.instances: expected a list of instance names")
            selected = tuple(item["instances"])
            for ref in selected:
                if ref not in instances:
                    raise ConfigError(f"{at}.instances: unknown instance {ref}")
        out.append(SuiteSpec(name, tolerance, selected))
    return tuple(out)


def _sampling(raw, where: str = "sampling") -> Sampling:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    seed = _integer(raw.get("seed", 0), f"{where}.seed")
    count = _integer(raw.get("count", 64), f"{where}.count", 1)
    margin = _number(raw.get("margin", 0.01), f"{where}.margin")
    if not 0.0 <= margin < 0.5:
        raise ConfigError(f"{where}.margin: must lie in [0, 0.5)")
    return Sampling(seed, count, margin)


def load_config(text: str, path: Path | None = None) -> Scenario:
    """Parse and build a scenario from its JSON text."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path or 'scenario'}: invalid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("scenario: expected a JSON object at the top level")
    instances_raw = _require(raw, "instances", "scenario")
    if not isinstance(instances_raw, dict) or not instances_raw:
        raise ConfigError("instances: expected a non-empty object")
    builder = _Builder(instances_raw)
    for name in instances_raw:
        builder.build(name)
    scenario = Scenario(
        name=raw.get("name", path.stem if path else "scenario"),
        instances=builder.built,
        suites=_suites(_require(raw, "suites", "scenario"), instances_raw),
        sampling=_sampling(raw.get("sampling", {})),
        path=path,
    )
    logging.info(f"Loaded scenario {scenario.name} with {len(scenario.instances)} instances")
    return scenario


def validate(scenario: Path) -> Scenario:
    """Validate a scenario file, raising ConfigError on the first problem found."""
    scenario = Path(scenario)
    if not scenario.is_file():
        raise ConfigError(f"{scenario}: scenario file not found")
    return load_config(scenario.read_text(), scenario)


def setup_cli_parser(args=None):
    parser = argparse.ArgumentParser()

    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version="{version}".format(version=__version__),
    )

    parser.add_argument(
        "scenario",
        help="A scenario file to validate",
        type=Path,
    )

    return parser.parse_args(args)


def cli(args=None):
    if args is None:
        args = sys.argv[1:]

    args = setup_cli_parser(args)

    try:
        scenario = validate(args.scenario)
    except ConfigError as e:
        print(e, file=sys.stderr)
        return 2
    print(f"{scenario.name}: {len(scenario.instances)} instances, {len(scenario.suites)} suites")
    return 0


if __name__ == "__main__":
    retval = cli(sys.argv[1:])
    if retval is not None:
        sys.exit(retval)
