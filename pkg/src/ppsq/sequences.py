"""GF(4) m-sequences and the pseudorandom phase sequence (PPS) sets built from them.

GF(4) = GF(2)[x]/(x^2 + x + 1) with symbols 0, 1, 2, 3 standing for
0, 1, x, x + 1.  Addition is XOR of the 2-bit encoding.

Polynomials are monic tuples written from the highest degree down:
``(1, c_{s-1}, ..., c_0)`` is ``x^s + c_{s-1} x^{s-1} + ... + c_0`` and drives
the recurrence ``a[k+s] = sum_i c_i a[k+i]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

# Quarter-turn phase q maps to the exact phasor 1j**q.
PHASORS = np.array([1, 1j, -1, -1j], dtype=complex)

ORTHOGONALITY_TOL = 1e-12
BALANCE_THETAS = (0.0, 0.7, math.pi / 3)

_MUL = np.array(
    [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
    ],
    dtype=np.int8,
)
_INV = {1: 1, 2: 3, 3: 2}


def gf4_add(a: int, b: int) -> int:
    return int(a) ^ int(b)


def gf4_mul(a: int, b: int) -> int:
    """Multiply two GF(4) symbols."""
    return int(_MUL[a, b])


def gf4_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(4)")
    return _INV[a]


@dataclass(frozen=True)
class MSequence:
    symbols: np.ndarray
    degree: int
    polynomial: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.symbols)

    def histogram(self) -> dict[int, int]:
        counts = np.bincount(self.symbols, minlength=4)
        return {k: int(counts[k]) for k in range(4)}


def _check_polynomial(polynomial: Sequence[int]) -> tuple[int, ...]:
    poly = tuple(int(c) for c in polynomial)
    if len(poly) < 2 or poly[0] != 1:
        raise ValueError(f"polynomial must be monic of degree >= 1, got {poly}")
    if any(c not in (0, 1, 2, 3) for c in poly):
        raise ValueError(f"polynomial coefficients must be GF(4) symbols, got {poly}")
    return poly


def _run_lfsr(poly: tuple[int, ...], seed: tuple[int, ...], length: int) -> np.ndarray:
    s = len(poly) - 1
    # taps[i] multiplies a[k+i]
    taps = poly[:0:-1]
    state = list(seed)
    out = np.empty(length, dtype=np.int8)
    for k in range(length):
        out[k] = state[0]
        nxt = 0
        for i in range(s):
            nxt ^= _MUL[taps[i], state[i]]
        state = state[1:] + [int(nxt)]
    return out


def lfsr_generate(polynomial: Sequence[int], seed: Sequence[int], length: int) -> MSequence:
    """Run the GF(4) LFSR for ``length`` output symbols.

    ``seed`` holds the first ``s`` output symbols ``a[0], ..., a[s-1]``.
    """
    poly = _check_polynomial(polynomial)
    s = len(poly) - 1
    seed = tuple(int(c) for c in seed)
    if len(seed) != s:
        raise ValueError(f"seed must have {s} symbols, got {len(seed)}")
    if any(c not in (0, 1, 2, 3) for c in seed):
        raise ValueError(f"seed symbols must be in 0..3, got {seed}")
    if not any(seed):
        raise ValueError("all-zero seed produces the constant zero sequence")
    if length < 0:
        raise ValueError("length must be non-negative")
    return MSequence(_run_lfsr(poly, seed, length), s, poly)


def state_period(polynomial: Sequence[int], seed: Sequence[int] | None = None) -> int:
    """Period of the LFSR state cycle containing ``seed`` (default ``(0,...,0,1)``)."""
    poly = _check_polynomial(polynomial)
    s = len(poly) - 1
    start = tuple(seed) if seed is not None else (0,) * (s - 1) + (1,)
    taps = poly[:0:-1]
    state = start
    for step in range(1, 4**s + 1):
        nxt = 0
        for i in range(s):
            nxt ^= int(_MUL[taps[i], state[i]])
        state = state[1:] + (nxt,)
        if state == start:
            return step
    return 0  # seed lies on a tail, never revisited


@lru_cache(maxsize=None)
def find_primitive_polynomials(degree: int) -> tuple[tuple[int, ...], ...]:
    """All monic degree-``s`` polynomials over GF(4) whose LFSR has period ``4^s - 1``.

    Found by brute force: a state cycle of length ``4^s - 1`` covers every
    nonzero state, so checking one seed is enough.  Lexicographic order.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    target = 4**degree - 1
    found = []
    for tail in itertools.product(range(4), repeat=degree):
        if tail[-1] == 0:
            continue
        poly = (1,) + tail
        if state_period(poly) == target:
            found.append(poly)
    return tuple(found)


def default_polynomial(degree: int) -> tuple[int, ...]:
    return find_primitive_polynomials(degree)[0]


def default_seed(degree: int) -> tuple[int, ...]:
    return (0,) * (degree - 1) + (1,)


@dataclass(frozen=True)
class PhaseSequence:
    """One PPS: quarter-turn integers (phase = q * pi/2) and its set index."""

    phases: np.ndarray
    index: int

    def __len__(self) -> int:
        return len(self.phases)

    @property
    def phasors(self) -> np.ndarray:
        return PHASORS[self.phases]

    @property
    def radians(self) -> np.ndarray:
        return self.phases * (math.pi / 2)


@dataclass(frozen=True)
class SequenceSet:
    degree: int
    polynomial: tuple[int, ...]
    seed: tuple[int, ...]
    sequences: tuple[PhaseSequence, ...] = field(repr=False)

    @property
    def N(self) -> int:
        return 4**self.degree

    @property
    def usable(self) -> int:
        return self.N - 1

    def __len__(self) -> int:
        return len(self.sequences)

    def __getitem__(self, j: int) -> PhaseSequence:
        return self.sequences[j]

    def matrix(self) -> np.ndarray:
        return np.stack([seq.phases for seq in self.sequences])


def sequences_from_base(base: np.ndarray) -> tuple[PhaseSequence, ...]:
    """Build lambda^(0..N-1) from one base m-sequence of length N-1.

    lambda^(j) for j >= 1 is the base rotated right by j-1, with a zero appended.
    """
    base = np.asarray(base, dtype=np.int8)
    n_slots = len(base) + 1
    seqs = [PhaseSequence(np.zeros(n_slots, dtype=np.int8), 0)]
    for j in range(1, n_slots):
        phases = np.append(np.roll(base, j - 1), np.int8(0)).astype(np.int8)
        seqs.append(PhaseSequence(phases, j))
    return tuple(seqs)


def build_sequence_set(
    degree: int,
    polynomial: Sequence[int] | None = None,
    seed: Sequence[int] | None = None,
) -> SequenceSet:
    """Generate the ``4^s`` phase sequences of degree ``s``.

    Symbols map straight to quarter turns (0 -> 0, 1 -> pi/2, 2 -> pi,
    3 -> 3pi/2).  Defaults to the lexicographically smallest primitive
    polynomial and seed ``(0,...,0,1)``.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    poly = _check_polynomial(polynomial) if polynomial is not None else default_polynomial(degree)
    if len(poly) - 1 != degree:
        raise ValueError(f"polynomial degree {len(poly) - 1} does not match degree {degree}")
    if state_period(poly) != 4**degree - 1:
        raise ValueError(f"polynomial {poly} is not primitive")
    seed = tuple(seed) if seed is not None else default_seed(degree)
    m = lfsr_generate(poly, seed, 4**degree - 1)
    return SequenceSet(degree, poly, tuple(int(c) for c in seed), sequences_from_base(m.symbols))


def correlation(a: PhaseSequence, b: PhaseSequence) -> complex:
    """Normalized correlation (1/N) sum_k exp(i a_k) exp(-i b_k)."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    # phase difference stays on the quarter-turn lattice
    diff = (a.phases.astype(np.int16) - b.phases) % 4
    return complex(PHASORS[diff].mean())


def correlation_matrix(sequences: Sequence[PhaseSequence]) -> np.ndarray:
    """Matrix G[a, b] = correlation(sequences[a], sequences[b])."""
    phasors = np.stack([s.phasors for s in sequences])
    return phasors @ phasors.conj().T / phasors.shape[1]


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class PropertyReport:
    checks: list[PropertyCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail}
                for c in self.checks
            ],
        }


def verify_set_properties(
    seq_set: SequenceSet | Sequence[PhaseSequence],
    thetas: Sequence[float] = BALANCE_THETAS,
    tol: float = ORTHOGONALITY_TOL,
) -> PropertyReport:
    """Check orthogonality, balance and closure of a phase-sequence set.

    Closure is checked on the phasor image (elementwise product, i.e. phase
    addition mod 2pi).  The additive closure of the underlying GF(4) symbols
    is reported separately as ``symbol_closure``.
    """
    seqs = list(seq_set.sequences if isinstance(seq_set, SequenceSet) else seq_set)
    n = len(seqs)
    checks = []

    gram = correlation_matrix(seqs)
    dev = np.abs(gram - np.eye(n))
    worst = float(dev.max()) if n else 0.0
    bad = [(int(seqs[a].index), int(seqs[b].index)) for a, b in zip(*np.nonzero(dev >= tol))]
    detail = f"{len(bad)} of {n * n} ordered pairs off delta"
    if bad:
        detail += f"; first: {bad[:6]}"
    checks.append(PropertyCheck("orthogonality", not bad, worst, detail))

    nonzero = [s for s in seqs if s.phases.any()]
    if nonzero:
        sums = [abs(np.exp(1j * t) * s.phasors.sum()) for s in nonzero for t in thetas]
        worst = float(max(sums))
        checks.append(
            PropertyCheck("balance", worst < tol, worst, f"{len(nonzero)} sequences x {len(thetas)} phases")
        )
    else:
        checks.append(PropertyCheck("balance", True, 0.0, "skipped: no nonzero sequence"))

    members = {s.phases.tobytes() for s in seqs}
    missing = 0
    for a in seqs:
        for b in seqs:
            if ((a.phases + b.phases) % 4).astype(np.int8).tobytes() not in members:
                missing += 1
    checks.append(
        PropertyCheck("closure", missing == 0, float(missing), f"{missing} of {n * n} products outside the set")
    )

    missing = 0
    for a in seqs:
        for b in seqs:
            if (a.phases ^ b.phases).astype(np.int8).tobytes() not in members:
                missing += 1
    checks.append(
        PropertyCheck(
            "symbol_closure", missing == 0, float(missing), f"{missing} of {n * n} GF(4) sums outside the set"
        )
    )
    return PropertyReport(checks)


# Permutations of the nonzero symbols (0 stays fixed).
RELABELINGS = tuple((0,) + p for p in itertools.permutations((1, 2, 3)))


@dataclass(frozen=True)
class SequenceMatch:
    polynomial: tuple[int, ...]
    seed: tuple[int, ...]
    relabeling: tuple[int, ...]
    shift: int

    def generate(self) -> np.ndarray:
        """Reproduce the matched target exactly."""
        s = len(self.polynomial) - 1
        m = lfsr_generate(self.polynomial, self.seed, 4**s - 1)
        return np.asarray(self.relabeling, dtype=np.int8)[m.symbols]


def match_paper_sequence(target: Sequence[int]) -> SequenceMatch | None:
    """Search polynomials, seeds and symbol relabelings for ``target``.

    Every nonzero seed of a primitive polynomial yields a rotation of the same
    m-sequence, so each (polynomial, relabeling) pair is tested against all
    rotations at once.  The reported seed reproduces ``target`` exactly
    (``shift`` is the rotation relative to the default seed).  Returns None if
    no witness exists.
    """
    target = np.asarray(target, dtype=np.int8)
    length = len(target)
    s = round(math.log(length + 1, 4))
    if s < 1 or 4**s - 1 != length:
        raise ValueError(f"target length {length} is not 4^s - 1")
    if not target.any():
        return None
    for poly in find_primitive_polynomials(s):
        ref = lfsr_generate(poly, default_seed(s), length).symbols
        for relabel in RELABELINGS:
            inverse = np.argsort(relabel).astype(np.int8)
            unlabeled = inverse[target]
            doubled = np.concatenate([ref, ref])
            for shift in range(length):
                if np.array_equal(doubled[shift : shift + length], unlabeled):
                    seed = tuple(int(c) for c in unlabeled[:s])
                    return SequenceMatch(poly, seed, relabel, shift)
    return None
