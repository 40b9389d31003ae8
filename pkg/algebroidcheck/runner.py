"""
Runs the check suites a scenario names over its instances and reports the defects found.

For every requested suite, every instance of a kind the suite understands is sampled at deterministic points
with deterministic random sections. Each suite's defects are merged into one report: the largest defect, the
sample where it occurred and the number of checks made. A suite passes when its largest defect is within its
tolerance and nothing raised inside it.

Two sub-commands are offered:

 1. check: run the suites and print the report as JSON or as a Markdown table
 2. validate: only load and validate a scenario

Exit status is 0 when every suite passes, 1 when at least one fails and 2 for a broken scenario or bad usage.

Run this script with the -h flag for more help, i.e. ~$ python runner.py -h
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    from algebroidcheck import __version__
    from algebroidcheck.documentor import REPORT_FORMATS, emit_report, exit_status
    from algebroidcheck.suites import SUITES, Probe, claims_jacobi
    from algebroidcheck.utils import CheckReport, ConfigError
    from algebroidcheck.validator import Scenario, validate
except ImportError:
    import sys

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck import __version__
    from algebroidcheck.documentor import REPORT_FORMATS, emit_report, exit_status
    from algebroidcheck.suites import SUITES, Probe, claims_jacobi
    from algebroidcheck.utils import CheckReport, ConfigError
    from algebroidcheck.validator import Scenario, validate

SCENARIOS_DIR = Path(__file__).parent / "scenarios"


@dataclass
class Report:
    suites: list[CheckReport] = field(default_factory=list)
    seed: int = 0
    samples: int = 64
    wall_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.suites)


def bundled_scenario(name: str) -> Path:
    """Path of a scenario shipped with the package, by file stem."""
    path = SCENARIOS_DIR / f"{name}.json"
    if not path.is_file():
        known = ", ".join(sorted(p.stem for p in SCENARIOS_DIR.glob("*.json")))
        raise ConfigError(f"No bundled scenario named {name}; must be one of {known}")
    return path


def run_suite(
    scenario: Scenario,
    seed: int | None = None,
    samples: int | None = None,
    tol_scale: float = 1.0,
    suites: list[str] | None = None,
) -> Report:
    """Run the scenario's suites, optionally restricted to the names in ``suites``.

    ``seed`` and ``samples`` override the scenario's sampling; ``tol_scale`` multiplies every tolerance.
    The report lists suites in the scenario's order and is identical for identical inputs."""
    if tol_scale <= 0:
        raise ConfigError("Tolerance scale must be positive")
    if suites is not None:
        unknown = [s for s in suites if s not in {spec.name for spec in scenario.suites}]
        if unknown:
            raise ConfigError(f"Suites not requested by scenario {scenario.name}: {', '.join(unknown)}")

    seed = scenario.sampling.seed if seed is None else seed
    count = scenario.sampling.count if samples is None else samples
    if count < 1:
        raise ConfigError("Sample count must be at least 1")

    started = time.perf_counter()
    report = Report(seed=seed, samples=count)
    for spec in scenario.suites:
        if suites is not None and spec.name not in suites:
            continue
        suite = SUITES[spec.name]
        tolerance = (spec.tolerance if spec.tolerance is not None else suite.tolerance) * tol_scale
        result = CheckReport(spec.name, tolerance)
        logging.info(f"Running suite {spec.name} with tolerance {tolerance:.1e}")
        targets = spec.instances if spec.instances is not None else tuple(scenario.instances)
        for label in targets:
            instance = scenario.instances[label]
            if not suite.applies_to(instance):
                if suite.needs_jacobi and not claims_jacobi(instance):
                    logging.debug(f"Skipping {label} in {spec.name}: it does not claim the Jacobi identity")
                continue
            probe = Probe.create(spec.name, label, result, seed, count, scenario.sampling.margin)
            try:
                suite.check(instance, probe)
            except Exception as e:
                result.fail(f"{label}: {type(e).__name__}: {e}")
        if result.checks == 0 and not result.errors:
            logging.warning(f"Suite {spec.name} found no instance to check")
        status = "passed" if result.passed else "FAILED"
        logging.info(f"Suite {spec.name} {status} after {result.checks} checks, max defect {result.max_defect:.3e}")
        report.suites.append(result)
    report.wall_ms = (time.perf_counter() - started) * 1000.0
    return report


def setup_cli_parser(args=None):
    parser = argparse.ArgumentParser()

    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version="{version}".format(version=__version__),
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    check = subparsers.add_parser("check", help="Run a scenario's check suites")

    check.add_argument(
        "-s",
        "--scenario",
        required=True,
        help="A scenario file, or the name of a bundled scenario",
    )

    check.add_argument("--seed", type=int, help="Overrides the scenario's sampling seed")

    check.add_argument("--samples", type=int, help="Overrides the scenario's sample count")

    check.add_argument("--tol-scale", type=float, default=1.0, help="Multiplies every suite tolerance")

    check.add_argument(
        "--suite",
        action="append",
        help="Run only this suite; may be given more than once",
    )

    check.add_argument(
        "-f",
        "--format",
        choices=REPORT_FORMATS,
        default="json",
        help="The report format",
    )

    check.add_argument("--timings", action="store_true", help="Include the wall time in the report")

    check.add_argument("-v", "--verbose", action="store_true", help="Log suite progress to stderr")

    validate_parser = subparsers.add_parser("validate", help="Only load and validate a scenario")

    validate_parser.add_argument(
        "scenario",
        help="A scenario file, or the name of a bundled scenario",
    )

    return parser.parse_args(args)


def _scenario_path(value: str) -> Path:
    path = Path(value)
    if path.suffix == ".json" or path.exists():
        return path
    return bundled_scenario(value)


def cli(args=None):
    if args is None:
        args = sys.argv[1:]

    try:
        args = setup_cli_parser(args)
    except SystemExit as e:
        return e.code

    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO)

    try:
        scenario = validate(_scenario_path(args.scenario))
        if args.command == "validate":
            print(f"{scenario.name}: {len(scenario.instances)} instances, {len(scenario.suites)} suites")
            return 0
        report = run_suite(scenario, args.seed, args.samples, args.tol_scale, args.suite)
    except ConfigError as e:
        print(e, file=sys.stderr)
        return 2

    print(emit_report(report, args.format, args.timings))
    return exit_status(report)


if __name__ == "__main__":
    retval = cli(sys.argv[1:])
    if retval is not None:
        sys.exit(retval)
