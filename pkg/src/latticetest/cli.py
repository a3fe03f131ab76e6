"""Operator command line.

Exit codes: 0 success, 2 bad command line (click), 3 unreadable or
unparseable input file, 4 semantically invalid input (geometry, profile,
bank coverage), 5 unexpected runtime failure.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import click

from latticetest.items import TemplateError
from latticetest.model import LatticeConfig, LatticeError
from latticetest.session import ItemBank, SessionError, SessionStore
from latticetest.simulate import (
    GradeDistribution,
    StudentProfile,
    exact_distribution,
    preset_profile,
    simulate_cohort,
    summarize,
)
from latticetest.stats import StatsError, correlation_report

EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_RUNTIME = 5


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path: str) -> LatticeConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        _fail(EXIT_PARSE, f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_PARSE, f"config {path} is not valid JSON: {exc}")
    try:
        return LatticeConfig.from_dict(doc)
    except (LatticeError, KeyError, TypeError) as exc:
        _fail(EXIT_VALIDATION, f"config {path} is invalid: {exc}")
    raise AssertionError("unreachable")


def _load_bank(path: str) -> ItemBank:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        _fail(EXIT_PARSE, f"cannot read bank {path}: {exc}")
    try:
        return ItemBank.from_json(text)
    except json.JSONDecodeError as exc:
        _fail(EXIT_PARSE, f"bank {path} is not valid JSON: {exc}")
    except (TemplateError, SessionError) as exc:
        _fail(EXIT_VALIDATION, f"bank {path} is invalid: {exc}")
    raise AssertionError("unreachable")


def _load_profile(spec: str, config: LatticeConfig) -> StudentProfile:
    if Path(spec).suffix == ".json" or "/" in spec:
        try:
            doc = json.loads(Path(spec).read_text())
            return StudentProfile(doc.get("name", Path(spec).stem), tuple(doc["p_correct"]))
        except OSError as exc:
            _fail(EXIT_PARSE, f"cannot read profile {spec}: {exc}")
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            _fail(EXIT_PARSE, f"profile {spec} is malformed: {exc}")
        except LatticeError as exc:
            _fail(EXIT_VALIDATION, str(exc))
    try:
        return preset_profile(config.kind, spec)
    except LatticeError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    raise AssertionError("unreachable")


def config_digest(config: LatticeConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _distribution_text(
    dist: GradeDistribution,
    config: LatticeConfig,
    fmt: str,
    meta: dict,
) -> str:
    summary = summarize(dist, config)
    meta = dict(meta, config_sha256=config_digest(config))
    if fmt == "json":
        doc = {
            **meta,
            "mean_grade": summary.mean_grade,
            "variance": summary.variance,
            "quantiles": {str(q): g for q, g in summary.quantiles.items()},
            "distribution": [
                {"column": r.column, "grade": r.grade, "mass": r.mass, "count": r.count}
                for r in summary.rows
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buffer = io.StringIO()
    for key in sorted(meta):
        buffer.write(f"# {key}: {meta[key]}\n")
    buffer.write(f"# mean_grade: {summary.mean_grade!r}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["column", "grade", "mass", "count"])
    for row in summary.rows:
        writer.writerow([row.column, repr(row.grade), repr(row.mass), row.count])
    return buffer.getvalue()


@click.group()
def main() -> None:
    """Adaptive lattice testing: simulation, item generation, stats, serving."""


@main.command()
@click.option("--config", "config_path", required=True, help="Test geometry JSON file.")
@click.option("--profile", required=True, help="Preset name (good/bad/direct/inverse) or profile JSON path.")
@click.option("--students", default=100_000, show_default=True, help="Cohort size.")
@click.option("--seed", default=0, show_default=True, help="Cohort RNG seed.")
@click.option("--out", default=None, help="Output path (default: stdout).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def simulate(config_path: str, profile: str, students: int, seed: int, out: str | None, fmt: str) -> None:
    """Monte Carlo grade distribution for an archetype cohort."""
    config = _load_config(config_path)
    prof = _load_profile(profile, config)
    try:
        dist = simulate_cohort(config, prof, students, seed)
    except LatticeError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    meta = {"command": "simulate", "profile": prof.name, "students": students, "seed": seed}
    _emit(_distribution_text(dist, config, fmt, meta), out)


@main.command()
@click.option("--config", "config_path", required=True, help="Test geometry JSON file.")
@click.option("--profile", required=True, help="Preset name or profile JSON path.")
@click.option("--out", default=None, help="Output path (default: stdout).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def exact(config_path: str, profile: str, out: str | None, fmt: str) -> None:
    """Exact grade distribution by dynamic programming (no sampling noise)."""
    config = _load_config(config_path)
    prof = _load_profile(profile, config)
    try:
        dist = exact_distribution(config, prof)
    except LatticeError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    meta = {"command": "exact", "profile": prof.name}
    _emit(_distribution_text(dist, config, fmt, meta), out)


@main.command("gen-items")
@click.option("--bank", "bank_path", required=True, help="Item bank JSON file.")
@click.option("--students", default=30, show_default=True, help="How many student keys to generate for.")
@click.option("--prefix", default="student", show_default=True, help="Student key prefix.")
@click.option("--out", required=True, help="Output directory for per-student files.")
def gen_items(bank_path: str, students: int, prefix: str, out: str) -> None:
    """One instance file per student: every bank template bound to that student."""
    bank = _load_bank(bank_path)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    bank_digest = hashlib.sha256(
        json.dumps(bank.to_dict(), sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    try:
        from latticetest.items import instantiate

        for i in range(1, students + 1):
            key = f"{prefix}{i:03d}"
            items = []
            for template in bank.templates:
                inst = instantiate(template, key, bank.seed)
                items.append(
                    {
                        "template_id": inst.template_id,
                        "level": inst.level,
                        "prompt": inst.rendered_prompt,
                        "bindings": dict(inst.bindings),
                        "expected_answer": inst.expected_answer,
                        "tolerance": inst.tolerance.to_dict(),
                    }
                )
            doc = {
                "student_key": key,
                "bank_seed": bank.seed,
                "bank_sha256": bank_digest,
                "items": items,
            }
            (out_dir / f"{key}.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    except ValueError as exc:
        _fail(EXIT_VALIDATION, f"instantiation failed: {exc}")
    click.echo(f"wrote {students} instance files to {out_dir}")


@main.command()
@click.option("--in", "input_path", required=True, help="Two-column delimited file of paired grades.")
@click.option("--out", default=None, help="Output path (default: stdout).")
def stats(input_path: str, out: str | None) -> None:
    """Correlation report (Pearson/Spearman with t-approximation p-values)."""
    try:
        text = Path(input_path).read_text()
    except OSError as exc:
        _fail(EXIT_PARSE, f"cannot read {input_path}: {exc}")
    xs: list[float] = []
    ys: list[float] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            _fail(EXIT_PARSE, f"{input_path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
        except ValueError:
            _fail(EXIT_PARSE, f"{input_path}:{lineno}: non-numeric value")
    try:
        report = correlation_report(xs, ys)
    except StatsError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    _emit(report.to_json() + "\n", out)


@main.command()
@click.option("--config", "config_path", required=True, help="Test geometry JSON file.")
@click.option("--bank", "bank_path", required=True, help="Item bank JSON file.")
@click.option("--test-id", default="default", show_default=True, help="Identifier clients use to start sessions.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="LATTICETEST_PORT", default=8000, show_default=True, help="Also settable via LATTICETEST_PORT.")
@click.option("--log", "log_path", default=None, help="Append-only event log for crash recovery.")
def serve(config_path: str, bank_path: str, test_id: str, host: str, port: int, log_path: str | None) -> None:
    """Run the live session service."""
    import uvicorn

    from latticetest.server import create_app

    config = _load_config(config_path)
    bank = _load_bank(bank_path)
    try:
        store = SessionStore(config, bank, log_path=log_path)
    except SessionError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    app = create_app({test_id: store})
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except OSError as exc:
        _fail(EXIT_RUNTIME, f"cannot bind {host}:{port}: {exc}")


if __name__ == "__main__":
    main()
