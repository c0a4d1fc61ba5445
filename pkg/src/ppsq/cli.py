"""Command-line entry point: ``ppsq gen|prepare|demod|reconstruct|measure|verify|pipeline``.

Exit codes: 0 pass, 1 verification failure, 2 malformed input,
3 non-reconstructible structure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ppsq import io, oracle, pipeline
from ppsq.demod import RECEIVERS
from ppsq.reconstruct import MODES
from ppsq.sequences import verify_set_properties
from ppsq.states import KINDS, StateSpec

STATE_CHOICES = [k.replace("_", "-") for k in KINDS]
EXPECTED_CHOICES = [k.replace("_", "-") for k in oracle.KINDS]

report_option = click.option(
    "--report", "report_path", type=click.Path(dir_okay=False), default=None, help="Write a JSON run report here."
)


def _parse_symbols(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        return tuple(int(c) for c in text.replace(" ", "").split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated symbols, got {text!r}")


def _finish(report: pipeline.RunReport, report_path: str | None) -> None:
    if report_path:
        report.write(report_path)
    if report.error:
        click.echo(f"{report.verdict}: [{report.error['stage']}] {report.error['message']}", err=True)
    sys.exit(report.exit_code)


def _spec_from_options(state: str, n: int | None, amps: str | None) -> StateSpec:
    kind = state.replace("-", "_")
    if kind == "custom":
        if amps is None:
            raise click.UsageError("--state custom needs --amps")
        vec = io.state_from_dict(io.read_json(amps))
        return StateSpec("custom", vec.n, vec.amplitudes)
    defaults = {"bell_psi_plus": 2, "bell_phi_plus": 2, "ghz": 3, "w": 3}
    if n is None:
        if kind not in defaults:
            raise click.UsageError(f"--state {state} needs --n")
        n = defaults[kind]
    return StateSpec(kind, n)


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Simulate quantum states with classical fields modulated by pseudorandom phase sequences."""


@main.command()
@click.option("--degree", "-s", type=click.IntRange(1, 6), help="LFSR degree s; N = 4^s.")
@click.option("--out", type=click.Path(dir_okay=False), help="Sequence-set JSON to write.")
@click.option("--polynomial", default=None, help="Monic polynomial, highest degree first, e.g. 1,1,2.")
@click.option("--lfsr-seed", default=None, help="Initial LFSR symbols, e.g. 0,1.")
@click.option("--verify", "verify_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Check an existing sequence-set file instead of generating one.")
@report_option
def gen(degree, out, polynomial, lfsr_seed, verify_path, report_path):
    """Generate a PPS set, or verify one with --verify."""
    report = pipeline.RunReport()
    with report.guard():
        if verify_path:
            with report.stage("gen-verify", {"seqs": verify_path}) as entry:
                seq_set = io.sequence_set_from_dict(io.read_json(verify_path))
                props = verify_set_properties(seq_set)
                entry["checks"] = props.to_dict()
            for c in props.checks:
                click.echo(f"{c.name:15s} {'PASS' if c.passed else 'FAIL'}  residual={c.residual:.3g}  {c.detail}")
            if not props.passed:
                failed = [c.name for c in props.checks if not c.passed]
                report.fail("fail", "gen-verify", f"properties failed: {', '.join(failed)}")
        else:
            if degree is None or out is None:
                raise click.UsageError("gen needs --degree and --out (or --verify)")
            seq_set = pipeline.stage_gen(report, degree, Path(out), _parse_symbols(polynomial), _parse_symbols(lfsr_seed))
            click.echo(f"wrote {seq_set.N} sequences of length {seq_set.N} to {out}")
    _finish(report, report_path)


@main.command("prepare")
@click.option("--state", type=click.Choice(STATE_CHOICES), required=True)
@click.option("--n", type=click.IntRange(1), default=None, help="Particle count (product).")
@click.option("--amps", type=click.Path(exists=True, dir_okay=False), default=None,
              help="State JSON with the target amplitudes (custom).")
@click.option("--seqs", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@report_option
def prepare_cmd(state, n, amps, seqs, out, report_path):
    """Prepare a field ensemble for a target state."""
    report = pipeline.RunReport()
    with report.guard():
        spec = _spec_from_options(state, n, amps)
        inputs = {"amps": amps} if amps else None
        ensemble = pipeline.stage_prepare(report, spec, Path(seqs), Path(out), inputs)
        if ensemble.diagnostics.get("collided"):
            click.echo(f"note: sequence collisions {json.dumps(ensemble.diagnostics['collisions'])}", err=True)
    _finish(report, report_path)


@main.command()
@click.option("--fields", "fields_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seqs", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Sequence set (defaults to the one referenced by the field file).")
@click.option("--all-references", is_flag=True, help="Demodulate against all N-1 nonzero sequences.")
@click.option("--receiver", type=click.Choice(RECEIVERS), default="decorrelating", show_default=True)
@click.option("--tau", type=float, default=None, help="Quantization threshold (default PPSQ_TAU or 1e-9).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@report_option
def demod(fields_path, seqs, all_references, receiver, tau, out, report_path):
    """Build the mode status matrix of a field ensemble."""
    report = pipeline.RunReport()
    with report.guard():
        m = pipeline.stage_demod(
            report, Path(fields_path), Path(out), Path(seqs) if seqs else None, all_references, receiver, tau
        )
        for label, row in zip(m.row_labels, m.labels()):
            click.echo(f"{label:>6s}  " + "  ".join(f"{e:>5s}" for e in row))
    _finish(report, report_path)


@main.command("reconstruct")
@click.option("--matrix", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--mode", type=click.Choice(MODES), default="binary", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@report_option
def reconstruct_cmd(matrix, mode, out, report_path):
    """Reconstruct the simulated state from a mode status matrix."""
    report = pipeline.RunReport()
    with report.guard():
        pipeline.stage_reconstruct(report, Path(matrix), Path(out), mode)
    _finish(report, report_path)


@main.command()
@click.option("--matrix", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--shots", type=click.IntRange(1), required=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@report_option
def measure(matrix, shots, seed, out, report_path):
    """Sample basis outcomes with the rotation-selection analogy."""
    report = pipeline.RunReport()
    with report.guard():
        counts = pipeline.stage_measure(report, Path(matrix), Path(out), shots, seed)
        for bits, c in counts.items():
            click.echo(f"{bits} {c}")
    _finish(report, report_path)


@main.command()
@click.option("--state", "state_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--expected", type=click.Choice(EXPECTED_CHOICES), default=None)
@click.option("--expected-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--tol", type=float, default=oracle.EQUAL_TOL, show_default=True)
@report_option
def verify(state_path, expected, expected_file, tol, report_path):
    """Compare a reconstructed state with a reference state (fidelity)."""
    if (expected is None) == (expected_file is None):
        raise click.UsageError("give exactly one of --expected and --expected-file")
    report = pipeline.RunReport()
    with report.guard():
        fid = pipeline.stage_verify(
            report, Path(state_path), expected, Path(expected_file) if expected_file else None, tol
        )
        click.echo(f"fidelity {fid:.15f}")
    _finish(report, report_path)


@main.command("pipeline")
@click.option("--state", type=click.Choice(STATE_CHOICES), required=True)
@click.option("--n", type=click.IntRange(1), default=None)
@click.option("--amps", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--degree", "-s", type=click.IntRange(1, 6), default=2, show_default=True)
@click.option("--mode", type=click.Choice(MODES), default=None, help="Default: binary, amplitude for custom.")
@click.option("--receiver", type=click.Choice(RECEIVERS), default="decorrelating", show_default=True)
@click.option("--shots", type=click.IntRange(0), default=0, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--tol", type=float, default=oracle.EQUAL_TOL, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@report_option
def pipeline_cmd(state, n, amps, degree, mode, receiver, shots, seed, tol, out_dir, report_path):
    """Run gen -> prepare -> demod -> reconstruct [-> measure] -> verify."""
    report = pipeline.RunReport()
    with report.guard():
        spec = _spec_from_options(state, n, amps)
        report = pipeline.run_pipeline(spec, degree, out_dir, mode, shots, seed, receiver, tol)
    report_path = report_path or str(Path(out_dir) / "report.json")
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    for stage in report.stages:
        click.echo(f"{stage['stage']:12s} {stage['seconds']:.4f}s")
    click.echo(f"verdict: {report.verdict}")
    _finish(report, report_path)


if __name__ == "__main__":
    main()
