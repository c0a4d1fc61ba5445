"""Dense state-vector reference used to check reconstructions.

States are plain complex numpy vectors of length 2^n with qubit 1 as the most
significant bit, i.e. ``np.kron`` order.
"""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 20
EQUAL_TOL = 1e-9

KINDS = ("product", "bell_psi_plus", "bell_phi_plus", "ghz", "w", "zero")


def _n_qubits(state: np.ndarray) -> int:
    dim = len(state)
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise ValueError(f"dense oracle is capped at {MAX_QUBITS} qubits, got {n}")


def normalize(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(state)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return state / norm


def ket(bits: str) -> np.ndarray:
    """Computational basis state, e.g. ket("01")."""
    check_size(len(bits))
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[int(bits, 2)] = 1
    return out


def tensor(*states: np.ndarray) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for s in states:
        out = np.kron(out, np.asarray(s, dtype=complex))
    check_size(_n_qubits(out))
    return out


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for normalized a and b."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def states_equal(a: np.ndarray, b: np.ndarray, tol: float = EQUAL_TOL) -> bool:
    """Equality up to global phase."""
    return fidelity(a, b) >= 1 - tol


def canonical_states(kind: str, n: int | None = None) -> np.ndarray:
    """Textbook amplitude vectors for the named families."""
    kind = kind.replace("-", "_")
    if kind in ("bell_psi_plus", "bell_phi_plus"):
        if n not in (None, 2):
            raise ValueError("Bell states have n = 2")
        bits = ("00", "11") if kind == "bell_psi_plus" else ("01", "10")
        return normalize(ket(bits[0]) + ket(bits[1]))
    if n is None:
        n = 3 if kind in ("ghz", "w") else 1
    if n < 1:
        raise ValueError("n must be >= 1")
    check_size(n)
    if kind == "product":
        return np.full(2**n, 2 ** (-n / 2), dtype=complex)
    if kind == "zero":
        return ket("0" * n)
    if kind == "ghz":
        return normalize(ket("0" * n) + ket("1" * n))
    if kind == "w":
        out = np.zeros(2**n, dtype=complex)
        for q in range(n):
            out[1 << q] = 1
        return normalize(out)
    raise ValueError(f"unknown state kind {kind!r}")


def permute_qubits(state: np.ndarray, order: list[int]) -> np.ndarray:
    """Reorder qubits: new qubit k is old qubit ``order[k]``."""
    n = _n_qubits(state)
    return np.asarray(state).reshape((2,) * n).transpose(order).reshape(-1)
