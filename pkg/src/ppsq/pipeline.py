"""Stage functions shared by the CLI subcommands and the one-shot pipeline."""

from __future__ import annotations

import hashlib
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ppsq import io, oracle
from ppsq.demod import build_matrix, default_tau, rebuild_fields
from ppsq.field import FieldEnsemble
from ppsq.reconstruct import NonReconstructibleError, StateVector, decompose_blocks, reconstruct, sample_measurement
from ppsq.sequences import SequenceSet, build_sequence_set, verify_set_properties
from ppsq.states import StateSpec, prepare

EXIT_PASS = 0
EXIT_VERIFY_FAILED = 1
EXIT_MALFORMED = 2
EXIT_NON_RECONSTRUCTIBLE = 3

VERDICT_EXIT = {
    "pass": EXIT_PASS,
    "fail": EXIT_VERIFY_FAILED,
    "malformed": EXIT_MALFORMED,
    "non_reconstructible": EXIT_NON_RECONSTRUCTIBLE,
}


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunReport:
    stages: list[dict] = field(default_factory=list)
    verdict: str = "pass"
    error: dict | None = None

    @contextmanager
    def stage(self, name: str, inputs: dict[str, str | Path] | None = None):
        """Record one stage; the body fills ``entry["output"]`` and ``entry["checks"]``."""
        entry = {
            "stage": name,
            "inputs": {k: file_digest(p) for k, p in (inputs or {}).items()},
            "output": None,
            "checks": {},
        }
        start = time.perf_counter()
        try:
            yield entry
        finally:
            entry["seconds"] = round(time.perf_counter() - start, 6)
            self.stages.append(entry)

    def fail(self, verdict: str, stage: str, message: str, detail: dict | None = None) -> None:
        self.verdict = verdict
        self.error = {"stage": stage, "message": message, "detail": detail or {}}

    @property
    def exit_code(self) -> int:
        return VERDICT_EXIT[self.verdict]

    @contextmanager
    def guard(self):
        """Turn stage exceptions into a failed verdict naming the stage."""
        try:
            yield
        except NonReconstructibleError as exc:
            self.fail("non_reconstructible", self._last_stage(), str(exc), exc.detail)
        except (ValueError, KeyError, OSError) as exc:
            self.fail("malformed", self._last_stage(), str(exc))

    def _last_stage(self) -> str:
        return self.stages[-1]["stage"] if self.stages else "setup"

    def to_dict(self) -> dict:
        return {"stages": self.stages, "verdict": self.verdict, "error": self.error}

    def write(self, path: str | Path) -> None:
        io.write_json(path, self.to_dict())


def _relative_ref(target: str | Path, out: str | Path) -> str:
    return os.path.relpath(Path(target).resolve(), Path(out).resolve().parent)


def stage_gen(report: RunReport, degree: int, out: Path, polynomial=None, seed=None) -> SequenceSet:
    with report.stage("gen") as entry:
        seq_set = build_sequence_set(degree, polynomial, seed)
        io.write_json(out, io.sequence_set_to_dict(seq_set))
        props = verify_set_properties(seq_set)
        entry["output"] = file_digest(out)
        entry["checks"] = {c.name: {"passed": c.passed, "residual": c.residual} for c in props.checks}
    return seq_set


def stage_prepare(report: RunReport, spec: StateSpec, seqs_path: Path, out: Path, inputs=None) -> FieldEnsemble:
    with report.stage("prepare", {"seqs": seqs_path, **(inputs or {})}) as entry:
        seq_set = io.sequence_set_from_dict(io.read_json(seqs_path))
        ensemble = prepare(spec, seq_set)
        io.write_json(out, io.ensemble_to_dict(ensemble, _relative_ref(seqs_path, out)))
        norms = [abs(f.norm() - 1) for f in ensemble.fields]
        entry["output"] = file_digest(out)
        entry["checks"] = {
            "fields": ensemble.n,
            "distinct_sequences": len(set(ensemble.sequence_indices)),
            "max_norm_residual": max(norms),
            "collided": bool(ensemble.diagnostics.get("collided", False)),
        }
    return ensemble


def stage_demod(
    report: RunReport,
    fields_path: Path,
    out: Path,
    seqs_path: Path | None = None,
    all_references: bool = False,
    receiver: str = "decorrelating",
    tau: float | None = None,
):
    inputs = {"fields": fields_path}
    if seqs_path is not None:
        inputs["seqs"] = seqs_path
    with report.stage("demod", inputs) as entry:
        seq_set = io.sequence_set_from_dict(io.read_json(seqs_path)) if seqs_path is not None else None
        ensemble = io.ensemble_from_dict(io.read_json(fields_path), seq_set, Path(fields_path).parent)
        if all_references:
            refs = list(ensemble.sequence_set.sequences[1:])
        else:
            refs = ensemble.references
        m = build_matrix(ensemble, refs, tau if tau is not None else default_tau(), receiver)
        io.write_json(out, io.matrix_to_dict(m))
        rebuilt = rebuild_fields(m, refs)
        residual = max(
            float(np.abs(np.concatenate([a.mode0 - b.mode0, a.mode1 - b.mode1])).max())
            for a, b in zip(rebuilt, ensemble.fields)
        )
        entry["output"] = file_digest(out)
        entry["checks"] = {"round_trip_residual": residual, "shape": list(m.shape), "receiver": receiver}
    return m


def stage_reconstruct(report: RunReport, matrix_path: Path, out: Path, mode: str = "binary"):
    with report.stage("reconstruct", {"matrix": matrix_path}) as entry:
        m = io.matrix_from_dict(io.read_json(matrix_path))
        blocks = decompose_blocks(m)
        state = reconstruct(m, mode)
        io.write_json(out, io.state_to_dict(state))
        entry["output"] = file_digest(out)
        entry["checks"] = {"mode": mode, "block_sizes": [b.size for b in blocks.blocks]}
    return state


def stage_measure(report: RunReport, matrix_path: Path, out: Path, shots: int, seed: int) -> dict:
    with report.stage("measure", {"matrix": matrix_path}) as entry:
        m = io.matrix_from_dict(io.read_json(matrix_path))
        counts = sample_measurement(m, seed, shots)
        io.write_json(out, {"shots": shots, "seed": seed, "qubit_order": list(m.row_labels), "counts": counts})
        entry["output"] = file_digest(out)
        entry["checks"] = {"outcomes": len(counts)}
    return counts


def expected_state(kind: str | None, n: int, expected_file: Path | None = None) -> np.ndarray:
    if expected_file is not None:
        return io.state_from_dict(io.read_json(expected_file)).amplitudes
    return oracle.canonical_states(kind, n)


def stage_verify(
    report: RunReport,
    state_path: Path,
    kind: str | None = None,
    expected_file: Path | None = None,
    tol: float = oracle.EQUAL_TOL,
) -> float:
    inputs = {"state": state_path}
    if expected_file is not None:
        inputs["expected"] = expected_file
    with report.stage("verify", inputs) as entry:
        state = io.state_from_dict(io.read_json(state_path))
        target = expected_state(kind, state.n, expected_file)
        fid = oracle.fidelity(oracle.normalize(state.amplitudes), oracle.normalize(target))
        passed = fid >= 1 - tol
        entry["checks"] = {"fidelity": fid, "tol": tol, "passed": passed}
    if not passed:
        report.fail("fail", "verify", f"fidelity {fid!r} below 1 - {tol}")
    return fid


def run_pipeline(
    spec: StateSpec,
    degree: int,
    out_dir: str | Path,
    mode: str | None = None,
    shots: int = 0,
    seed: int = 0,
    receiver: str = "decorrelating",
    tol: float = oracle.EQUAL_TOL,
) -> RunReport:
    """gen -> prepare -> demod -> reconstruct [-> measure] -> verify, writing every artifact.

    A failing stage stops the run; its error lands in ``report.error`` and
    ``report.verdict`` selects the exit code.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mode = mode or ("amplitude" if spec.kind == "custom" else "binary")
    report = RunReport()
    with report.guard():
        paths = {k: out_dir / f"{k}.json" for k in ("seqs", "fields", "matrix", "state", "histogram")}
        expected_file = None
        if spec.kind == "custom":
            expected_file = out_dir / "expected.json"
            io.write_json(
                expected_file,
                io.state_to_dict(StateVector(spec.custom_amplitudes, [f"f{i + 1}" for i in range(spec.n)])),
            )

        stage_gen(report, degree, paths["seqs"])
        inputs = {"amps": expected_file} if expected_file is not None else None
        stage_prepare(report, spec, paths["seqs"], paths["fields"], inputs)
        stage_demod(report, paths["fields"], paths["matrix"], receiver=receiver)
        stage_reconstruct(report, paths["matrix"], paths["state"], mode)
        if shots:
            stage_measure(report, paths["matrix"], paths["histogram"], shots, seed)
        kind = None if spec.kind == "custom" else spec.kind
        stage_verify(report, paths["state"], kind, expected_file, tol)
    return report

