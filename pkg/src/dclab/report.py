"""Run checks on an instance, compare with expected verdicts, write report files."""
from __future__ import annotations

import csv
import json
import os
import platform
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .catalog import CHECKS, Instance, coverage_key, serialize
from .criterion import evaluate_criterion, transitivity_probe
from .orbits import boundedness_certificate, coverage_report, growth_certificate
from .scalar import format_rational
from .subspaces import sample_balls, sample_targets

__all__ = ["REPORT_FORMAT", "InapplicableCheck", "RunReport", "run_report", "write_atomic", "export_csv"]

REPORT_FORMAT = "dclab-report/1"


class InapplicableCheck(ValueError):
    pass


@dataclass
class RunReport:
    instance: Instance
    checks: list[str]
    sections: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    wall_time: float | None = None
    cli: dict | None = None

    @property
    def expectations(self) -> dict:
        out = {}
        for key, want in self.instance.expected.items():
            if key in self.verdicts:
                got = self.verdicts[key]
                out[key] = {"expected": want, "actual": got, "match": want == got}
        return out

    @property
    def mismatches(self) -> list[str]:
        return [k for k, v in self.expectations.items() if not v["match"]]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        out = {
            "format": REPORT_FORMAT,
            "instance": self.instance.name,
            "checks": list(self.checks),
            "parameters": self.instance.params.to_json(),
            "verdicts": dict(self.verdicts),
            "expectations": self.expectations,
            "mismatches": self.mismatches,
            "ok": self.ok,
            "sections": self.sections,
            "instance_spec": serialize(self.instance),
            "versions": {"dclab": __version__, "python": platform.python_version()},
        }
        if self.cli is not None:
            out["cli"] = self.cli
        if self.wall_time is not None:
            out["wall_time_seconds"] = round(self.wall_time, 6)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def _check_coverage(inst: Instance, cone: bool = False):
    p = inst.params
    radii = (p.radius,) if cone else p.coverage_radii
    sections, verdicts = [], {}
    for r in radii:
        targets = sample_targets(inst.sub, r, p.targets, p.sampling_window, p.seed)
        rep = coverage_report(
            inst.op,
            inst.seed_vector,
            inst.sub,
            targets,
            p.max_n,
            p.tol_squared,
            inst.name,
            {"radius": format_rational(r), "seed": p.seed},
            cone=cone,
        )
        sections.append(rep.to_json())
        verdicts["cone" if cone else coverage_key(r)] = rep.passed
    return sections, verdicts


def _check_criterion(inst: Instance):
    if inst.criterion is None:
        raise InapplicableCheck(f"{inst.name} has no criterion instance")
    rep = evaluate_criterion(inst.criterion, k_max=inst.params.k_max)
    return rep.to_json(), {"criterion": rep.passed}


def _check_transitivity(inst: Instance):
    p = inst.params
    pairs = sample_balls(inst.sub, p.radius, p.ball_pairs, p.sampling_window, p.seed)
    rows, hits, coupled = [], 0, True
    for i, (U, V) in enumerate(pairs):
        res = transitivity_probe(inst.op, inst.sub, U, V, p.max_n, p.window)
        row = {"index": i, "U": U.to_json(), "V": V.to_json()}
        row.update(res.to_json())
        rows.append(row)
        if res.found:
            hits += 1
            coupled = coupled and res.invariance.holds
    passed = hits == len(pairs) and coupled
    section = {"pairs": len(pairs), "hits": hits, "invariance_coupled": coupled, "passed": passed, "rows": rows}
    return section, {"transitivity": passed}


def _check_growth(inst: Instance):
    cert = growth_certificate(inst.op, inst.seed_vector, (1, inst.params.growth_n))
    return cert.to_json(), {"growth": cert.certified}


def _check_bounded(inst: Instance):
    cert = boundedness_certificate(inst.op, inst.seed_vector, inst.params.max_n)
    return cert.to_json(), {"bounded": cert.analytic}


_RUNNERS = {
    "coverage": _check_coverage,
    "cone": lambda inst: _check_coverage(inst, cone=True),
    "criterion": _check_criterion,
    "transitivity": _check_transitivity,
    "growth": _check_growth,
    "bounded": _check_bounded,
}


def default_checks(inst: Instance) -> list[str]:
    names = {k.split("@")[0] for k in inst.expected}
    return [c for c in CHECKS if c in names]


def run_report(
    inst: Instance,
    checks: list[str] | None = None,
    out_path=None,
    wall_time: bool = False,
    cli: dict | None = None,
) -> RunReport:
    """Run ``checks`` in the fixed order of :data:`CHECKS` and optionally write the report.

    Wall time is left out unless asked for, so equal inputs give byte-identical files.
    """
    checks = default_checks(inst) if checks is None else list(checks)
    unknown = [c for c in checks if c not in _RUNNERS]
    if unknown:
        raise InapplicableCheck(f"unknown checks: {', '.join(unknown)}")
    if "criterion" in checks and inst.criterion is None:
        raise InapplicableCheck(f"{inst.name} has no criterion instance")
    ordered = [c for c in CHECKS if c in checks]
    report = RunReport(inst, ordered, cli=cli)
    start = time.perf_counter()
    for name in ordered:
        section, verdicts = _RUNNERS[name](inst)
        report.sections[name] = section
        report.verdicts.update(verdicts)
    if wall_time:
        report.wall_time = time.perf_counter() - start
    if out_path is not None:
        write_atomic(out_path, report.dumps())
    return report


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


CSV_COLUMNS = ["check", "radius", "index", "hit", "n", "alpha_re", "alpha_im", "residual"]


def export_csv(report: dict, out_path) -> int:
    """Write one row per coverage target found in a report; returns the row count."""
    rows = []
    for name in ("coverage", "cone"):
        for section in report.get("sections", {}).get(name, []):
            radius = section["parameters"].get("radius", "")
            for r in section["rows"]:
                rows.append({"check": name, "radius": radius, **r})
    path = Path(out_path)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return len(rows)
