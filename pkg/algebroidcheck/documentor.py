"""
Renders a check report as JSON, as a Markdown table or as an ASCIIDOC table.

Example:

Input: the report of the bundled "tangent-basic" scenario

Output (text):

Suite | Checks | Max defect | Tolerance | Result | Worst sample
--- | --- | --- | --- | --- | ---
antisymmetry | 128 | 0.000e+00 | 1.0e-10 | pass | `(-0.4375, 0.2222)` [a, b] + [b, a]
...

Overall: pass (seed 0, 64 samples)

The JSON form carries the same content under the keys suites, pass, seed and samples. The wall time is only
included when asked for, so that two runs of one scenario with one seed give byte-identical output.
"""

import json
import math

try:
    from algebroidcheck.utils import CheckReport
except ImportError:
    import sys
    from pathlib import Path

    sys.path.append(str(Path(__file__).parent.parent.resolve()))
    from algebroidcheck.utils import CheckReport

REPORT_FORMATS = ("json", "text", "asciidoc")


def _number(value: float):
    return value if math.isfinite(value) else str(value)


def suite_entry(result: CheckReport) -> dict:
    worst = None
    if result.worst is not None:
        worst = {"point": list(result.worst.point), "detail": result.worst.detail}
    entry = {
        "name": result.name,
        "checks": result.checks,
        "maxDefect": _number(result.max_defect),
        "tolerance": result.tolerance,
        "pass": result.passed,
        "worst": worst,
    }
    if result.errors:
        entry["errors"] = list(result.errors)
    return entry


def _point(point) -> str:
    return "(" + ", ".join(f"{p:.4g}" for p in point) + ")"


def create_table(report, t="markdown") -> str:
    if t == "asciidoc":
        header = "|===\n| Suite | Checks | Max defect | Tolerance | Result | Worst sample\n\n"
    else:
        header = "Suite | Checks | Max defect | Tolerance | Result | Worst sample\n--- | --- | --- | --- | --- | ---\n"

    body = ""
    for r in report.suites:
        worst = ""
        if r.worst is not None:
            worst = f"`{_point(r.worst.point)}` {r.worst.detail}"
        if r.errors:
            worst = "; ".join(r.errors) + (f"; {worst}" if worst else "")
        result = "pass" if r.passed else "FAIL"
        cells = [r.name, str(r.checks), f"{r.max_defect:.3e}", f"{r.tolerance:.1e}", result, worst]
        if t == "asciidoc":
            body += "| " + " | ".join(cells) + "\n"
        else:
            body += " | ".join(cells) + "\n"

    if t == "asciidoc":
        footer = "|===\n"
    else:
        footer = ""

    return (header + body + footer).strip()


def emit_report(report, format: str = "json", timings: bool = False) -> str:
    """Serialize a report. ``timings`` adds the wall time, which makes the output run-dependent."""
    if format not in REPORT_FORMATS:
        raise ValueError(f"Unknown report format {format}; must be one of {', '.join(REPORT_FORMATS)}")

    if format == "json":
        doc = {
            "suites": [suite_entry(r) for r in report.suites],
            "pass": report.passed,
            "seed": report.seed,
            "samples": report.samples,
        }
        if timings:
            doc["wallMs"] = round(report.wall_ms, 3)
        return json.dumps(doc, indent=2)

    summary = f"Overall: {'pass' if report.passed else 'FAIL'} (seed {report.seed}, {report.samples} samples"
    summary += f", {report.wall_ms:.0f} ms)" if timings else ")"
    return create_table(report, "asciidoc" if format == "asciidoc" else "markdown") + "\n\n" + summary


def exit_status(report) -> int:
    return 0 if report.passed else 1
