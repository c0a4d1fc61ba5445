"""JSON artifacts: sequence sets, field ensembles, matrices, states.

Artifacts are written in canonical form (sorted keys, floats with 17
significant digits, no whitespace variation) so equal content gives equal
bytes and equal digests.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from ppsq.demod import ModeStatusMatrix
from ppsq.field import ClassicalField, FieldEnsemble
from ppsq.reconstruct import StateVector
from ppsq.sequences import PhaseSequence, SequenceSet


class ArtifactError(ValueError):
    """Malformed artifact file."""


def _encode(obj: Any) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite float {x} in artifact")
        if x == 0:
            x = 0.0  # drop the sign of -0.0
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    return _encode(obj)


def digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def write_json(path: str | Path, obj: Any) -> str:
    """Write the canonical form (plus newline); return its digest."""
    text = canonical_json(obj)
    Path(path).write_text(text + "\n", encoding="utf-8")
    return hashlib.sha256(text.encode()).hexdigest()


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc


def complex_list(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex)]


def parse_complex(pairs) -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ArtifactError(f"expected [re, im] pairs: {exc}") from exc
    if arr.ndim == 1 and arr.shape == (2,):
        return np.complex128(arr[0] + 1j * arr[1])
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ArtifactError(f"expected [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def sequence_set_to_dict(seq_set: SequenceSet) -> dict:
    return {
        "p": 4,
        "s": seq_set.degree,
        "N": seq_set.N,
        "polynomial": list(seq_set.polynomial),
        "seed": list(seq_set.seed),
        "sequences": [seq.phases.tolist() for seq in seq_set.sequences],
    }


def sequence_set_from_dict(d: dict) -> SequenceSet:
    try:
        if d.get("p", 4) != 4:
            raise ArtifactError("only p = 4 is supported")
        s, N = int(d["s"]), int(d["N"])
        rows = [np.asarray(r, dtype=np.int8) for r in d["sequences"]]
        polynomial, seed = tuple(d["polynomial"]), tuple(d["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed sequence-set file: {exc}") from exc
    if N != 4**s or len(rows) != N or any(r.shape != (N,) for r in rows):
        raise ArtifactError(f"sequence set must hold {4**s} sequences of length {4**s}")
    if any(((r < 0) | (r > 3)).any() for r in rows):
        raise ArtifactError("phases must be quarter-turn integers 0..3")
    seqs = tuple(PhaseSequence(r, j) for j, r in enumerate(rows))
    return SequenceSet(s, polynomial, seed, seqs)


def ensemble_to_dict(ensemble: FieldEnsemble, sequence_set_ref: str | None = None) -> dict:
    """``sequence_set_ref`` is a path; without it the set is stored inline."""
    return {
        "N": ensemble.sequence_set.N,
        "sequence_set": sequence_set_ref
        if sequence_set_ref is not None
        else sequence_set_to_dict(ensemble.sequence_set),
        "sequence_indices": list(ensemble.sequence_indices),
        "diagnostics": ensemble.diagnostics,
        "fields": [
            {"label": label, "mode0": complex_list(f.mode0), "mode1": complex_list(f.mode1)}
            for label, f in zip(ensemble.labels, ensemble.fields)
        ],
    }


def ensemble_from_dict(d: dict, seq_set: SequenceSet | None = None, base_dir: str | Path = ".") -> FieldEnsemble:
    try:
        if seq_set is None:
            ref = d["sequence_set"]
            if isinstance(ref, str):
                path = Path(ref)
                if not path.is_absolute():
                    path = Path(base_dir) / path
                ref = read_json(path)
            seq_set = sequence_set_from_dict(ref)
        fields = [ClassicalField(parse_complex(f["mode0"]), parse_complex(f["mode1"])) for f in d["fields"]]
        labels = [f.get("label", f"f{i + 1}") for i, f in enumerate(d["fields"])]
        indices = [int(j) for j in d.get("sequence_indices", range(1, len(fields) + 1))]
        return FieldEnsemble(fields, seq_set, indices, labels, dict(d.get("diagnostics", {})))
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed field-ensemble file: {exc}") from exc


def matrix_to_dict(m: ModeStatusMatrix) -> dict:
    q = m.quantized
    rows, cols = m.shape
    return {
        "n": rows,
        "n_cols": cols,
        "col_sequences": list(m.col_sequences),
        "row_labels": list(m.row_labels),
        "tau": m.tau,
        "receiver": m.receiver,
        "entries": [
            [
                {
                    "raw0": complex_list([m.raw[i, j, 0]])[0],
                    "raw1": complex_list([m.raw[i, j, 1]])[0],
                    "q": [int(q[i, j, 0]), int(q[i, j, 1])],
                }
                for j in range(cols)
            ]
            for i in range(rows)
        ],
    }


def matrix_from_dict(d: dict, tau: float | None = None) -> ModeStatusMatrix:
    try:
        entries = d["entries"]
        raw = np.array(
            [[[parse_complex(e["raw0"]), parse_complex(e["raw1"])] for e in row] for row in entries],
            dtype=complex,
        )
        if raw.size == 0:
            raise ArtifactError("empty matrix")
        return ModeStatusMatrix(
            raw,
            [int(j) for j in d["col_sequences"]],
            float(d.get("tau", 1e-9)) if tau is None else tau,
            d.get("row_labels"),
            d.get("receiver", "decorrelating"),
        )
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed matrix file: {exc}") from exc


def state_to_dict(state: StateVector) -> dict:
    return {"n": state.n, "qubit_order": list(state.qubit_order), "amplitudes": complex_list(state.amplitudes)}


def state_from_dict(d: dict) -> StateVector:
    try:
        amps = np.atleast_1d(parse_complex(d["amplitudes"]))
        n = int(d.get("n", len(amps).bit_length() - 1))
        order = list(d.get("qubit_order", [f"q{i + 1}" for i in range(n)]))
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed state file: {exc}") from exc
    if len(amps) != 2**n or len(order) != n:
        raise ArtifactError(f"state with n = {n} needs {2**n} amplitudes")
    return StateVector(amps, order)
