"""Quadrature demodulation and the mode status matrix."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ppsq.field import ClassicalField, FieldEnsemble
from ppsq.sequences import PHASORS, PhaseSequence, correlation_matrix

DEFAULT_TAU = 1e-9
RECEIVERS = ("decorrelating", "matched")


def default_tau() -> float:
    """Quantization threshold, overridable through PPSQ_TAU."""
    value = os.environ.get("PPSQ_TAU")
    return float(value) if value else DEFAULT_TAU


def demodulate_phase(input_seq: PhaseSequence, reference: PhaseSequence) -> float:
    """In-phase decision variable (1/N) sum_k cos(lambda_k - lambda_k^ref)."""
    if len(input_seq) != len(reference):
        raise ValueError(f"length mismatch: {len(input_seq)} vs {len(reference)}")
    diff = (input_seq.phases.astype(np.int16) - reference.phases) % 4
    return float(PHASORS[diff].real.mean())


def quantize(raw0: complex, raw1: complex, tau: float) -> tuple[int, int]:
    return int(abs(raw0) > tau), int(abs(raw1) > tau)


@dataclass(frozen=True)
class ModeStatus:
    raw0: complex
    raw1: complex
    quantized: tuple[int, int]

    @property
    def label(self) -> str:
        """(1,0), (0,1), (1,1) or 0."""
        if self.quantized == (0, 0):
            return "0"
        return f"({self.quantized[0]},{self.quantized[1]})"


def demodulate_field(f: ClassicalField, reference: PhaseSequence, tau: float | None = None) -> ModeStatus:
    """Correlate both modes of ``f`` against one reference PPS."""
    if f.N != len(reference):
        raise ValueError(f"length mismatch: {f.N} vs {len(reference)}")
    tau = default_tau() if tau is None else tau
    conj_ref = reference.phasors.conj()
    raw0 = complex(np.dot(f.mode0, conj_ref) / f.N)
    raw1 = complex(np.dot(f.mode1, conj_ref) / f.N)
    return ModeStatus(raw0, raw1, quantize(raw0, raw1, tau))


@dataclass
class ModeStatusMatrix:
    """Demodulation results for every (field, reference) pair.

    ``raw`` has shape (n_rows, n_cols, 2): the complex coefficient of each
    reference PPS on mode 0 and mode 1 of each field.
    """

    raw: np.ndarray
    col_sequences: list[int]
    tau: float = DEFAULT_TAU
    row_labels: list[str] | None = None
    receiver: str = "decorrelating"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=complex)
        if self.raw.ndim != 3 or self.raw.shape[2] != 2:
            raise ValueError(f"raw must have shape (rows, cols, 2), got {self.raw.shape}")
        if len(self.col_sequences) != self.raw.shape[1]:
            raise ValueError("one column sequence index per column")
        if self.row_labels is None:
            self.row_labels = [f"f{i + 1}" for i in range(self.raw.shape[0])]

    @classmethod
    def from_quantized(cls, q, col_sequences: Sequence[int] | None = None, **kw) -> "ModeStatusMatrix":
        """Matrix whose raw values are the 0/1 indicators themselves.

        Entries may be given as (a, b) pairs or as the scalar 0.
        """
        rows = [[(0, 0) if np.isscalar(e) and e == 0 else tuple(e) for e in row] for row in q]
        raw = np.array(rows, dtype=complex)
        if col_sequences is None:
            col_sequences = list(range(1, raw.shape[1] + 1))
        return cls(raw, list(col_sequences), **kw)

    @property
    def shape(self) -> tuple[int, int]:
        return self.raw.shape[0], self.raw.shape[1]

    @property
    def n(self) -> int:
        return self.raw.shape[0]

    @property
    def quantized(self) -> np.ndarray:
        """Integer array of shape (rows, cols, 2)."""
        return (np.abs(self.raw) > self.tau).astype(np.int8)

    @property
    def support(self) -> np.ndarray:
        """Boolean (rows, cols): entry is not the zero status."""
        return self.quantized.any(axis=2)

    def entry(self, i: int, j: int) -> ModeStatus:
        r0, r1 = self.raw[i, j]
        return ModeStatus(complex(r0), complex(r1), quantize(r0, r1, self.tau))

    def labels(self) -> list[list[str]]:
        return [[self.entry(i, j).label for j in range(self.shape[1])] for i in range(self.shape[0])]

    def quantized_pairs(self) -> list[list[tuple[int, int]]]:
        q = self.quantized
        return [[(int(q[i, j, 0]), int(q[i, j, 1])) for j in range(q.shape[1])] for i in range(q.shape[0])]


def _check_references(references: Sequence[PhaseSequence]) -> None:
    seen = set()
    for ref in references:
        key = ref.phases.tobytes()
        if key in seen:
            raise ValueError(f"duplicate reference sequence (index {ref.index})")
        seen.add(key)


def build_matrix(
    fields: FieldEnsemble | Sequence[ClassicalField],
    references: Sequence[PhaseSequence] | None = None,
    tau: float | None = None,
    receiver: str = "decorrelating",
) -> ModeStatusMatrix:
    """Demodulate every field against every reference.

    ``receiver="matched"`` keeps the plain correlation of each field with each
    reference.  Distinct GF(4) phase sequences are not all mutually
    orthogonal (shifts differing by a multiple of (N-1)/3 correlate to
    +-i/2), so the default ``"decorrelating"`` receiver solves the
    reference Gram system on top of the matched outputs; it reproduces the
    matched result exactly whenever the references are orthogonal.
    """
    if receiver not in RECEIVERS:
        raise ValueError(f"receiver must be one of {RECEIVERS}, got {receiver!r}")
    labels = None
    if isinstance(fields, FieldEnsemble):
        labels = list(fields.labels)
        if references is None:
            references = fields.references
        fields = fields.fields
    if references is None:
        raise ValueError("references are required for a bare field list")
    references = list(references)
    _check_references(references)
    tau = default_tau() if tau is None else tau
    N = len(references[0])
    if any(len(r) != N for r in references) or any(f.N != N for f in fields):
        raise ValueError("fields and references must share N")

    conj_refs = np.stack([r.phasors for r in references]).conj()  # (cols, N)
    slots = np.stack([f.as_array() for f in fields])  # (rows, 2, N)
    matched = np.einsum("rmk,ck->rcm", slots, conj_refs) / N
    if receiver == "decorrelating":
        gram = correlation_matrix(references)
        # matched[r, c, m] = sum_c' x[r, c', m] * gram[c', c]
        raw = np.linalg.solve(gram.T, matched.transpose(1, 0, 2).reshape(len(references), -1))
        raw = raw.reshape(len(references), len(fields), 2).transpose(1, 0, 2)
    else:
        raw = matched
    return ModeStatusMatrix(raw, [r.index for r in references], tau, labels, receiver)


def measure_amplitudes(f: ClassicalField) -> tuple[float, float]:
    """Per-mode RMS amplitude (|alpha|, |beta|)."""
    return (
        float(np.sqrt(np.mean(np.abs(f.mode0) ** 2))),
        float(np.sqrt(np.mean(np.abs(f.mode1) ** 2))),
    )


def rebuild_fields(m: ModeStatusMatrix, references: Sequence[PhaseSequence]) -> list[ClassicalField]:
    """Invert demodulation: field i = sum_j raw(i, j) exp(i lambda^(j)) per mode."""
    carriers = np.stack([r.phasors for r in references])  # (cols, N)
    slots = np.einsum("rcm,ck->rmk", m.raw, carriers)
    return [ClassicalField(s[0], s[1]) for s in slots]
