"""Field ensembles for the named state families and for arbitrary states.

Named families take the first n usable sequences in index order
(a -> lambda^(1), b -> lambda^(2), c -> lambda^(3)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ppsq.field import (
    ClassicalField,
    FieldEnsemble,
    apply_unitary,
    beam_split,
    carrier_field,
    make_unitary,
    modulate,
    superpose,
)
from ppsq.sequences import SequenceSet

INV_SQRT2 = 1 / np.sqrt(2)
KINDS = ("product", "bell_psi_plus", "bell_phi_plus", "ghz", "w", "custom")


class InsufficientSequencesError(ValueError):
    pass


@dataclass
class StateSpec:
    kind: str
    n: int
    custom_amplitudes: np.ndarray | None = None

    def __post_init__(self):
        self.kind = self.kind.replace("-", "_")
        if self.kind not in KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind.startswith("bell") and self.n != 2:
            raise ValueError("Bell states have n = 2")
        if self.kind in ("ghz", "w") and self.n != 3:
            raise ValueError(f"{self.kind} is defined for n = 3")
        if self.kind == "custom":
            if self.custom_amplitudes is None:
                raise ValueError("custom state needs amplitudes")
            amps = np.asarray(self.custom_amplitudes, dtype=complex)
            if amps.shape != (2**self.n,):
                raise ValueError(f"expected {2**self.n} amplitudes, got {amps.shape}")
            if abs(np.linalg.norm(amps) - 1) > 1e-9:
                raise ValueError("custom amplitudes must be normalized")
            self.custom_amplitudes = amps


def _require(seq_set: SequenceSet, n: int) -> None:
    if n > seq_set.usable:
        raise InsufficientSequencesError(
            f"{n} fields need {n} distinct nonzero sequences; degree {seq_set.degree} offers {seq_set.usable}"
        )


def _normalized_sum(parts: list[ClassicalField]) -> ClassicalField:
    return superpose(parts)[0]


def prepare_product(n: int, seq_set: SequenceSet) -> FieldEnsemble:
    """Field i = exp(i lambda^(i)) (|0) + |1)) / sqrt(2)."""
    _require(seq_set, n)
    fields = [modulate(seq_set[i], INV_SQRT2, INV_SQRT2) for i in range(1, n + 1)]
    return FieldEnsemble(fields, seq_set, list(range(1, n + 1)))


def _bell_psi_plus_fields(seq_set: SequenceSet) -> list[ClassicalField]:
    a, b = seq_set[1], seq_set[2]
    psi_a = _normalized_sum([carrier_field(a, 1, 0), carrier_field(b, 0, 1)])
    psi_b = _normalized_sum([carrier_field(b, 1, 0), carrier_field(a, 0, 1)])
    return [psi_a, psi_b]


def prepare_bell(variant: str, seq_set: SequenceSet) -> FieldEnsemble:
    """Two-field Bell ensembles.

    ``psi_plus`` (|00) + |11)): psi_a = (e^{i la}|0) + e^{i lb}|1))/sqrt2,
    psi_b = (e^{i lb}|0) + e^{i la}|1))/sqrt2.  ``phi_plus`` flips the modes of
    psi_b with U(pi/2, 0), which is sigma_x up to a global phase.
    """
    variant = variant.replace("-", "_").removeprefix("bell_")
    _require(seq_set, 2)
    fields = _bell_psi_plus_fields(seq_set)
    if variant == "phi_plus":
        fields[1] = apply_unitary(make_unitary(np.pi / 2, 0.0), fields[1])
    elif variant != "psi_plus":
        raise ValueError(f"unknown Bell variant {variant!r}")
    return FieldEnsemble(fields, seq_set, [1, 2], labels=["a", "b"])


def prepare_ghz(seq_set: SequenceSet) -> FieldEnsemble:
    """Cyclic pairing (la|0)+lb|1)), (lb|0)+lc|1)), (lc|0)+la|1))."""
    _require(seq_set, 3)
    seqs = [seq_set[1], seq_set[2], seq_set[3]]
    fields = [
        _normalized_sum([carrier_field(seqs[i], 1, 0), carrier_field(seqs[(i + 1) % 3], 0, 1)])
        for i in range(3)
    ]
    return FieldEnsemble(fields, seq_set, [1, 2, 3], labels=["a", "b", "c"])


def w_source_field(seq_set: SequenceSet) -> ClassicalField:
    a, b, c = seq_set[1], seq_set[2], seq_set[3]
    return _normalized_sum([carrier_field(a, 0, 1), carrier_field(b, 1, 0), carrier_field(c, 1, 0)])


def prepare_w(seq_set: SequenceSet, via_splitters: bool = True) -> FieldEnsemble:
    """Three copies of (e^{i la}|1) + e^{i lb}|0) + e^{i lc}|0))/sqrt3.

    With ``via_splitters`` the copies come from one source field passed
    through two balanced beam splitters and are then renormalized.
    """
    _require(seq_set, 3)
    source = w_source_field(seq_set)
    if via_splitters:
        first, rest = beam_split(source)
        second, third = beam_split(rest)
        fields = [f.normalized() for f in (first, second, third)]
    else:
        fields = [source, source, source]
    return FieldEnsemble(fields, seq_set, [1, 2, 3], labels=["a", "b", "c"])


# Coefficient maps: {(sequence index, mode): complex amplitude} for one field.
Coefficients = dict[tuple[int, int], complex]


def _recurse(
    amps: np.ndarray, seqs: list[int], collisions: list[dict], zero_tol: float
) -> list[Coefficients]:
    """Coefficient maps of len(seqs) fields simulating the (normalized) ``amps``.

    Split on the last qubit: amps = Phi (x) |0> + Theta (x) |1>.  Phi uses
    sequences seqs[:-1]; Theta uses seqs[:-2] + seqs[-1:].  The last field
    carries the branch norms: ||Phi|| on (seqs[-1], |0)) and ||Theta|| on
    (seqs[-2], |1)), so that every rotation product reproduces its
    amplitude.
    """
    k = len(seqs)
    if k == 1:
        return [{(seqs[0], 0): complex(amps[0]), (seqs[0], 1): complex(amps[1])}]
    pairs = amps.reshape(-1, 2)
    phi, theta = pairs[:, 0], pairs[:, 1]
    n_phi, n_theta = np.linalg.norm(phi), np.linalg.norm(theta)
    branches = []
    if n_phi > zero_tol:
        branches.append(_recurse(phi / n_phi, seqs[:-1], collisions, zero_tol))
    if n_theta > zero_tol:
        branches.append(_recurse(theta / n_theta, seqs[:-2] + seqs[-1:], collisions, zero_tol))

    if len(branches) == 2:
        used = [
            [{seq for (seq, _), v in f.items() if abs(v) > zero_tol} for f in branch] for branch in branches
        ]
        shared = set().union(*used[0]) & set().union(*used[1])
        if shared:
            same_field = [
                [i, seq] for i in range(k - 1) for seq in sorted(used[0][i] & used[1][i])
            ]
            collisions.append({"level": k, "sequences": sorted(shared), "same_field": same_field})

    fields: list[Coefficients] = []
    for i in range(k - 1):
        merged: Coefficients = {}
        for branch in branches:
            for key, value in branch[i].items():
                merged[key] = merged.get(key, 0) + value
        fields.append(merged)
    last: Coefficients = {}
    if n_phi > zero_tol:
        last[(seqs[-1], 0)] = complex(n_phi)
    if n_theta > zero_tol:
        last[(seqs[-2], 1)] = complex(n_theta)
    fields.append(last)
    return fields


def custom_coefficients(
    amplitudes: Sequence[complex], seqs: list[int], zero_tol: float = 1e-12
) -> tuple[list[Coefficients], list[dict]]:
    amps = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(amps)
    if norm <= zero_tol:
        raise ValueError("amplitude vector is zero")
    collisions: list[dict] = []
    coeffs = _recurse(amps / norm, seqs, collisions, zero_tol)
    return coeffs, collisions


def prepare_custom(amplitudes: Sequence[complex], seq_set: SequenceSet) -> FieldEnsemble:
    """Recursive construction for an arbitrary n-qubit state.

    Adds one field and one sequence per qubit.  Each field is the normalized
    sum of its two branch contributions.  Recursion levels where both
    branches use a common sequence (on the same field or on different ones)
    are listed in ``diagnostics["collisions"]``; the cyclic reconstruction is
    not guaranteed to recover such ensembles.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    n = len(amps).bit_length() - 1
    if len(amps) < 2 or 1 << n != len(amps):
        raise ValueError(f"amplitude vector length {len(amps)} is not 2^n")
    if abs(np.linalg.norm(amps) - 1) > 1e-9:
        raise ValueError("amplitudes must be normalized")
    _require(seq_set, n)
    seqs = list(range(1, n + 1))
    coeffs, collisions = custom_coefficients(amps, seqs)
    fields = []
    for c in coeffs:
        parts = [carrier_field(seq_set[j], v, 0) if mode == 0 else carrier_field(seq_set[j], 0, v)
                 for (j, mode), v in sorted(c.items())]
        fields.append(_normalized_sum(parts))
    diagnostics = {"collisions": collisions, "collided": bool(collisions)}
    return FieldEnsemble(fields, seq_set, seqs, diagnostics=diagnostics)


def prepare(spec: StateSpec, seq_set: SequenceSet) -> FieldEnsemble:
    if spec.kind == "product":
        return prepare_product(spec.n, seq_set)
    if spec.kind.startswith("bell"):
        return prepare_bell(spec.kind, seq_set)
    if spec.kind == "ghz":
        return prepare_ghz(seq_set)
    if spec.kind == "w":
        return prepare_w(seq_set)
    return prepare_custom(spec.custom_amplitudes, seq_set)
