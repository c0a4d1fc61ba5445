"""Two-mode classical fields stored slot by slot.

A field is a pair of length-N complex vectors: ``mode0[k]`` and ``mode1[k]``
are the coefficients of modes |0) and |1) at sequence position k.  A field
modulated with PPS lambda carries ``alpha * exp(i lambda_k)`` on mode 0 and
``beta * exp(i lambda_k)`` on mode 1; sums of such fields stay in the same
representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ppsq.sequences import PhaseSequence, SequenceSet

INPUT_NORM_TOL = 1e-9


class DegenerateFieldError(ValueError):
    """A superposition cancelled to the zero field."""


@dataclass(frozen=True)
class ClassicalField:
    mode0: np.ndarray
    mode1: np.ndarray

    def __post_init__(self):
        m0 = np.asarray(self.mode0, dtype=complex)
        m1 = np.asarray(self.mode1, dtype=complex)
        if m0.shape != m1.shape or m0.ndim != 1:
            raise ValueError(f"mode vectors must be 1-D with equal length, got {m0.shape} and {m1.shape}")
        object.__setattr__(self, "mode0", m0)
        object.__setattr__(self, "mode1", m1)

    @property
    def N(self) -> int:
        return len(self.mode0)

    def as_array(self) -> np.ndarray:
        """Shape (2, N) array of the two mode vectors."""
        return np.stack([self.mode0, self.mode1])

    def scaled(self, z: complex) -> "ClassicalField":
        return ClassicalField(z * self.mode0, z * self.mode1)

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def normalized(self) -> "ClassicalField":
        norm = self.norm()
        if norm == 0:
            raise DegenerateFieldError("cannot normalize the zero field")
        return self.scaled(1 / norm)

    def allclose(self, other: "ClassicalField", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.mode0, other.mode0, rtol=0, atol=atol)
            and np.allclose(self.mode1, other.mode1, rtol=0, atol=atol)
        )


@dataclass
class FieldEnsemble:
    """n fields sharing one sequence set.

    ``sequence_indices`` lists the PPS indices the preparation used; they are
    the demodulation references.  ``diagnostics`` collects preparation notes
    (for example sequence collisions in the recursive construction).
    """

    fields: list[ClassicalField]
    sequence_set: SequenceSet
    sequence_indices: list[int]
    labels: list[str] | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        N = self.sequence_set.N
        for f in self.fields:
            if f.N != N:
                raise ValueError(f"field length {f.N} does not match sequence length {N}")
        if len(self.fields) > self.sequence_set.usable:
            raise ValueError(
                f"{len(self.fields)} fields exceed the {self.sequence_set.usable} usable sequences"
            )
        if len(set(self.sequence_indices)) != len(self.sequence_indices):
            raise ValueError("sequence indices must be distinct")
        if 0 in self.sequence_indices:
            raise ValueError("lambda^(0) cannot be used for modulation")
        if self.labels is None:
            self.labels = [f"f{i + 1}" for i in range(len(self.fields))]

    def __len__(self) -> int:
        return len(self.fields)

    @property
    def n(self) -> int:
        return len(self.fields)

    @property
    def references(self) -> list[PhaseSequence]:
        return [self.sequence_set[j] for j in self.sequence_indices]


def modulate(pps: PhaseSequence, alpha: complex, beta: complex) -> ClassicalField:
    """Field exp(i lambda) (alpha |0) + beta |1))."""
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1) > INPUT_NORM_TOL:
        raise ValueError(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")
    carrier = pps.phasors
    return ClassicalField(alpha * carrier, beta * carrier)


def carrier_field(pps: PhaseSequence, alpha: complex, beta: complex) -> ClassicalField:
    """Like :func:`modulate` without the normalization check (building blocks of superpositions)."""
    carrier = pps.phasors
    return ClassicalField(alpha * carrier, beta * carrier)


def superpose(
    fields: Sequence[ClassicalField], weights: Sequence[complex] | None = None, tol: float = 1e-12
) -> tuple[ClassicalField, float]:
    """Slotwise weighted sum, renormalized.

    Returns the normalized field and the normalization constant C (the norm of
    the raw sum).  Raises DegenerateFieldError if the sum vanishes.
    """
    if not fields:
        raise ValueError("need at least one field")
    if weights is None:
        weights = [1] * len(fields)
    if len(weights) != len(fields):
        raise ValueError("one weight per field")
    N = fields[0].N
    if any(f.N != N for f in fields):
        raise ValueError("fields must share N")
    m0 = sum(w * f.mode0 for w, f in zip(weights, fields))
    m1 = sum(w * f.mode1 for w, f in zip(weights, fields))
    raw = ClassicalField(m0, m1)
    c = raw.norm()
    if c <= tol:
        raise DegenerateFieldError("superposition cancels to the zero field")
    return raw.scaled(1 / c), c


def make_unitary(chi: float, theta: float) -> np.ndarray:
    """exp(i chi (sigma_x cos theta + sigma_y sin theta)) as a 2x2 matrix.

    Acting on |0) this gives cos chi |0) + i e^{i theta} sin chi |1).
    """
    c, s = np.cos(chi), np.sin(chi)
    return np.array(
        [
            [c, 1j * np.exp(-1j * theta) * s],
            [1j * np.exp(1j * theta) * s, c],
        ],
        dtype=complex,
    )


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    u = np.asarray(u)
    return u.shape == (2, 2) and float(np.abs(u.conj().T @ u - np.eye(2)).max()) < tol


def apply_unitary(u: np.ndarray, f: ClassicalField) -> ClassicalField:
    out = np.asarray(u, dtype=complex) @ f.as_array()
    return ClassicalField(out[0], out[1])


def beam_split(
    f: ClassicalField,
    ratio: tuple[float, float] = (1.0, 1.0),
    phases: tuple[float, float] = (0.0, 0.0),
) -> tuple[ClassicalField, ClassicalField]:
    """Split one field into two with power ratio |C_a|^2 : |C_b|^2.

    Output x is C_x (alpha |0) + beta e^{i phi_x} |1)), slot by slot.
    """
    ra, rb = ratio
    if ra < 0 or rb < 0 or ra + rb == 0:
        raise ValueError(f"invalid power ratio {ratio}")
    ca, cb = np.sqrt(ra / (ra + rb)), np.sqrt(rb / (ra + rb))
    pa, pb = np.exp(1j * phases[0]), np.exp(1j * phases[1])
    return (
        ClassicalField(ca * f.mode0, ca * pa * f.mode1),
        ClassicalField(cb * f.mode0, cb * pb * f.mode1),
    )


def mode_split(
    f: ClassicalField, phases: tuple[float, float] = (0.0, 0.0)
) -> tuple[ClassicalField, ClassicalField]:
    """Separate the two modes: (alpha e^{i phi_a} |0), beta e^{i phi_b} |1))."""
    zero = np.zeros(f.N, dtype=complex)
    return (
        ClassicalField(np.exp(1j * phases[0]) * f.mode0, zero),
        ClassicalField(zero, np.exp(1j * phases[1]) * f.mode1),
    )


def inner_product(a: ClassicalField, b: ClassicalField) -> complex:
    """(a|b) = (1/N) sum_k [a0_k conj(b0_k) + a1_k conj(b1_k)]."""
    if a.N != b.N:
        raise ValueError(f"length mismatch: {a.N} vs {b.N}")
    return complex((np.vdot(b.mode0, a.mode0) + np.vdot(b.mode1, a.mode1)) / a.N)
