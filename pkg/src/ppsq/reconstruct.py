"""State reconstruction from a mode status matrix.

The matrix is split into irreducible blocks (connected components of the
field/sequence incidence graph).  Inside a block of size l the l cyclic
rotations of the column order each assign one sequence to every field; every
rotation contributes the product of the selected per-field mode statuses and
the block state is their normalized sum.  The full state is the tensor
product of the block states.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ppsq.demod import ModeStatusMatrix

MODES = ("binary", "amplitude")
MAX_DENSE_QUBITS = 20


class NonReconstructibleError(ValueError):
    """The matrix has no valid block structure or a block yields no state."""

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.detail = detail or {}


@dataclass(frozen=True)
class Block:
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.rows)


@dataclass
class BlockDecomposition:
    blocks: list[Block]
    row_permutation: list[int]
    column_permutation: list[int]
    unused_columns: list[int] = field(default_factory=list)


@dataclass
class StateVector:
    amplitudes: np.ndarray
    qubit_order: list[str]

    @property
    def n(self) -> int:
        return len(self.qubit_order)


def decompose_blocks(m: ModeStatusMatrix) -> BlockDecomposition:
    """Connected components of the bipartite row/column support graph.

    Blocks are ordered by their smallest row; rows and columns inside a block
    ascend.  Columns with no nonzero status are left out of every block.
    """
    support = m.support
    n_rows, n_cols = support.shape
    graph = np.zeros((n_rows + n_cols, n_rows + n_cols), dtype=bool)
    graph[:n_rows, n_rows:] = support
    graph[n_rows:, :n_rows] = support.T
    _, labels = connected_components(csr_matrix(graph), directed=False)

    empty_rows = [i for i in range(n_rows) if not support[i].any()]
    if empty_rows:
        raise NonReconstructibleError(
            f"fields {empty_rows} carry none of the reference sequences", {"empty_rows": empty_rows}
        )
    unused = [j for j in range(n_cols) if not support[:, j].any()]

    blocks = []
    for label in sorted(set(labels[:n_rows]), key=lambda c: int(np.argmax(labels[:n_rows] == c))):
        rows = tuple(int(i) for i in np.flatnonzero(labels[:n_rows] == label))
        cols = tuple(int(j) for j in np.flatnonzero(labels[n_rows:] == label))
        blocks.append(Block(rows, cols))

    bad = [b for b in blocks if len(b.rows) != len(b.cols)]
    if bad:
        raise NonReconstructibleError(
            f"{len(bad)} block(s) pair unequal numbers of fields and sequences",
            {"blocks": [{"rows": list(b.rows), "cols": list(b.cols)} for b in bad]},
        )
    row_perm = [i for b in blocks for i in b.rows]
    col_perm = [j for b in blocks for j in b.cols] + unused
    return BlockDecomposition(blocks, row_perm, col_perm, unused)


def schedule_permutations(block: Block | int) -> list[list[int]]:
    """The cyclic rotations R_1..R_l of a block's column order.

    Rotation r (0-based) gives field t of the block the column at position
    (t + r) mod l.
    """
    cols = list(block.cols) if isinstance(block, Block) else list(range(block))
    l = len(cols)
    if l < 1:
        raise ValueError("block must be non-empty")
    return [[cols[(t + r) % l] for t in range(l)] for r in range(l)]


def _statuses(m: ModeStatusMatrix, mode: str) -> np.ndarray:
    if mode == "binary":
        return m.quantized.astype(complex)
    if mode == "amplitude":
        # entries below the quantization threshold count as absent
        return np.where(m.quantized.astype(bool), m.raw, 0)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def rotation_terms(block: Block, m: ModeStatusMatrix, mode: str = "binary") -> list[np.ndarray | None]:
    """Product vector contributed by each rotation, or None where it vanishes."""
    values = _statuses(m, mode)
    terms = []
    for rotation in schedule_permutations(block):
        factors = [values[i, j] for i, j in zip(block.rows, rotation)]
        if any(not f.any() for f in factors):
            terms.append(None)
            continue
        out = np.ones(1, dtype=complex)
        for f in factors:
            out = np.kron(out, f)
        terms.append(out)
    return terms


def reconstruct_block(block: Block, m: ModeStatusMatrix, mode: str = "binary") -> np.ndarray:
    """Normalized state of one block over its fields (ascending row order)."""
    if block.size != len(block.cols):
        raise NonReconstructibleError("block is not square")
    if block.size > MAX_DENSE_QUBITS:
        raise ValueError(f"block of {block.size} fields exceeds the dense limit {MAX_DENSE_QUBITS}")
    terms = [t for t in rotation_terms(block, m, mode) if t is not None]
    if not terms:
        raise NonReconstructibleError("every rotation term vanishes", {"rows": list(block.rows)})
    total = np.sum(terms, axis=0)
    norm = np.linalg.norm(total)
    if norm < 1e-12:
        raise NonReconstructibleError("rotation terms cancel", {"rows": list(block.rows)})
    return total / norm


def reconstruct_factors(m: ModeStatusMatrix, mode: str = "binary") -> list[tuple[Block, np.ndarray]]:
    """Per-block states without forming the full tensor product."""
    dec = decompose_blocks(m)
    return [(b, reconstruct_block(b, m, mode)) for b in dec.blocks]


def reconstruct(m: ModeStatusMatrix, mode: str = "binary") -> StateVector:
    """Tensor product of the block states, in the original field order."""
    n = m.n
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"{n} fields exceed the dense limit {MAX_DENSE_QUBITS}; use reconstruct_factors")
    factors = reconstruct_factors(m, mode)
    state = np.ones(1, dtype=complex)
    order = []
    for block, amps in factors:
        state = np.kron(state, amps)
        order.extend(block.rows)
    # axis k of the product currently holds field order[k]
    state = state.reshape((2,) * n).transpose(np.argsort(order)).reshape(-1)
    return StateVector(state, list(m.row_labels))


def sample_measurement(m: ModeStatusMatrix, seed: int, shots: int) -> dict[str, int]:
    """Measurement analogy: random rotation per block, random mode per field.

    Each shot draws, for every block, one rotation uniformly among those with
    a nonzero product term, then for each field one of the modes present in
    its selected status.  Shot k uses its own substream spawned from ``seed``.
    """
    dec = decompose_blocks(m)
    q = m.quantized
    choices = []
    for block in dec.blocks:
        options = []
        for rotation in schedule_permutations(block):
            modes = [tuple(np.flatnonzero(q[i, j])) for i, j in zip(block.rows, rotation)]
            if all(modes):
                options.append(modes)
        if not options:
            raise NonReconstructibleError("every rotation term vanishes", {"rows": list(block.rows)})
        choices.append((block, options))

    counts: Counter[str] = Counter()
    for stream in np.random.SeedSequence(seed).spawn(shots):
        rng = np.random.default_rng(stream)
        bits = [0] * m.n
        for block, options in choices:
            modes = options[int(rng.integers(len(options)))]
            for row, allowed in zip(block.rows, modes):
                bits[row] = int(allowed[int(rng.integers(len(allowed)))])
        counts["".join(map(str, bits))] += 1
    return dict(sorted(counts.items()))
