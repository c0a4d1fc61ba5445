from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppsq.demod import ModeStatusMatrix, build_matrix
from ppsq.oracle import canonical_states, fidelity, permute_qubits
from ppsq.reconstruct import (
    Block,
    NonReconstructibleError,
    decompose_blocks,
    reconstruct,
    reconstruct_factors,
    rotation_terms,
    sample_measurement,
    schedule_permutations,
)
from ppsq.states import prepare_bell, prepare_ghz, prepare_product, prepare_w

Q_BELL_PSI = [[(1, 0), (0, 1)], [(0, 1), (1, 0)]]
Q_BELL_PHI = [[(1, 0), (0, 1)], [(1, 0), (0, 1)]]
Q_GHZ = [[(1, 0), (0, 1), (0, 0)], [(0, 0), (1, 0), (0, 1)], [(0, 1), (0, 0), (1, 0)]]
Q_W = [[(0, 1), (1, 0), (1, 0)]] * 3


def bfs_components(support):
    """Oracle: plain BFS over the bipartite row/column graph."""
    rows, cols = support.shape
    seen_r, seen_c, comps = set(), set(), []
    for start in range(rows):
        if start in seen_r:
            continue
        comp_r, comp_c = set(), set()
        queue = deque([("r", start)])
        seen_r.add(start)
        while queue:
            side, k = queue.popleft()
            if side == "r":
                comp_r.add(k)
                for j in np.flatnonzero(support[k]):
                    if j not in seen_c:
                        seen_c.add(j)
                        queue.append(("c", int(j)))
            else:
                comp_c.add(k)
                for i in np.flatnonzero(support[:, k]):
                    if i not in seen_r:
                        seen_r.add(i)
                        queue.append(("r", int(i)))
        comps.append((tuple(sorted(comp_r)), tuple(sorted(comp_c))))
    return comps


def test_schedule():
    assert schedule_permutations(3) == [[0, 1, 2], [1, 2, 0], [2, 0, 1]]
    assert schedule_permutations(Block((4,), (7,))) == [[7]]
    with pytest.raises(ValueError):
        schedule_permutations(0)


def test_blocks_product():
    dec = decompose_blocks(ModeStatusMatrix.from_quantized([[(1, 1), (0, 0)], [(0, 0), (1, 1)]]))
    assert [b.rows for b in dec.blocks] == [(0,), (1,)]


def test_blocks_ghz_single():
    dec = decompose_blocks(ModeStatusMatrix.from_quantized(Q_GHZ))
    assert dec.blocks == [Block((0, 1, 2), (0, 1, 2))]


def test_blocks_mixed():
    q = [
        [(1, 0), (0, 1), (0, 0)],
        [(0, 1), (1, 0), (0, 0)],
        [(0, 0), (0, 0), (1, 1)],
    ]
    dec = decompose_blocks(ModeStatusMatrix.from_quantized(q))
    assert [b.size for b in dec.blocks] == [2, 1]
    assert dec.row_permutation == [0, 1, 2]


def test_blocks_non_square():
    q = [[(1, 0), (0, 1)], [(1, 0), (0, 0)], [(0, 0), (0, 0)]]
    with pytest.raises(NonReconstructibleError):
        decompose_blocks(ModeStatusMatrix.from_quantized(q))
    q = [[(1, 0), (0, 1), (1, 0)], [(0, 1), (1, 0), (0, 0)], [(0, 0), (0, 0), (0, 0)]]
    with pytest.raises(NonReconstructibleError, match="carry none"):
        decompose_blocks(ModeStatusMatrix.from_quantized(q))


def test_unused_columns():
    q = [[(1, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (0, 1)]]
    dec = decompose_blocks(ModeStatusMatrix.from_quantized(q))
    assert dec.unused_columns == [1]
    assert [b.cols for b in dec.blocks] == [(0,), (2,)]


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.lists(st.lists(st.booleans(), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_blocks_match_bfs(grid):
    support = np.array(grid, dtype=bool)
    q = np.stack([support, np.zeros_like(support)], axis=-1).astype(int)
    m = ModeStatusMatrix.from_quantized(q)
    expected = [(r, c) for r, c in bfs_components(support)]
    if any(not support[i].any() for i in range(len(grid))) or any(len(r) != len(c) for r, c in expected if c):
        with pytest.raises(NonReconstructibleError):
            decompose_blocks(m)
        return
    dec = decompose_blocks(m)
    assert [(b.rows, b.cols) for b in dec.blocks] == expected


@pytest.mark.parametrize(
    "q,kind",
    [(Q_BELL_PSI, "bell_psi_plus"), (Q_BELL_PHI, "bell_phi_plus"), (Q_GHZ, "ghz"), (Q_W, "w")],
)
def test_binary_reconstruction_from_quantized(q, kind):
    state = reconstruct(ModeStatusMatrix.from_quantized(q))
    assert fidelity(state.amplitudes, canonical_states(kind)) > 1 - 1e-12


def test_ghz_third_rotation_vanishes():
    m = ModeStatusMatrix.from_quantized(Q_GHZ)
    terms = rotation_terms(decompose_blocks(m).blocks[0], m)
    assert terms[2] is None and terms[0] is not None and terms[1] is not None


def test_product_reconstruction(s2):
    for n in (1, 2, 5):
        state = reconstruct(build_matrix(prepare_product(n, s2)))
        assert fidelity(state.amplitudes, canonical_states("product", n)) > 1 - 1e-12


def test_factors_skip_dense(s2):
    factors = reconstruct_factors(build_matrix(prepare_product(15, s2)))
    assert len(factors) == 15 and all(len(v) == 2 for _, v in factors)


def test_row_permutation_invariance(s2):
    # reorder the fields: the reconstruction permutes its qubits the same way
    ens = prepare_ghz(s2)
    m = build_matrix(ens)
    order = [2, 0, 1]
    m2 = ModeStatusMatrix(m.raw[order], m.col_sequences, m.tau, [m.row_labels[i] for i in order])
    a = reconstruct(m).amplitudes
    b = reconstruct(m2).amplitudes
    assert fidelity(permute_qubits(a, order), b) > 1 - 1e-12


def test_column_permutation_invariance(s2):
    m = build_matrix(prepare_w(s2))
    perm = [1, 2, 0]
    m2 = ModeStatusMatrix(m.raw[:, perm], [m.col_sequences[j] for j in perm], m.tau, m.row_labels)
    assert fidelity(reconstruct(m).amplitudes, reconstruct(m2).amplitudes) > 1 - 1e-12


def test_idempotent(s2):
    m = build_matrix(prepare_bell("phi_plus", s2))
    a, b = reconstruct(m), reconstruct(m)
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_amplitude_mode_phase(s2):
    m = build_matrix(prepare_bell("psi_plus", s2))
    state = reconstruct(m, "amplitude")
    assert fidelity(state.amplitudes, canonical_states("bell_psi_plus")) > 1 - 1e-12
    with pytest.raises(ValueError):
        reconstruct(m, "bogus")


def test_all_terms_vanish():
    q = [[(1, 0), (1, 0)], [(0, 0), (0, 1)]]
    # rotation 1 uses (0,0)->col0,(1)->col1; rotation 2 hits the zero status
    state = reconstruct(ModeStatusMatrix.from_quantized(q))
    assert state.n == 2
    q = [[(0, 0), (1, 0)], [(0, 0), (0, 1)]]
    with pytest.raises(NonReconstructibleError):
        reconstruct(ModeStatusMatrix.from_quantized(q))


def test_sampling_bell():
    counts = sample_measurement(ModeStatusMatrix.from_quantized(Q_BELL_PSI), seed=7, shots=2000)
    assert set(counts) == {"00", "11"} and sum(counts.values()) == 2000


def test_sampling_reproducible():
    m = ModeStatusMatrix.from_quantized(Q_W)
    assert sample_measurement(m, 11, 500) == sample_measurement(m, 11, 500)
    assert sample_measurement(m, 11, 500) != sample_measurement(m, 12, 500)


def test_sampling_prefix_stable():
    # shot k has its own stream, so more shots only add outcomes
    m = ModeStatusMatrix.from_quantized([[(1, 1)]])
    small = sample_measurement(m, 3, 100)
    large = sample_measurement(m, 3, 200)
    assert all(large[k] >= v for k, v in small.items())


def test_sampling_w_outcomes():
    counts = sample_measurement(ModeStatusMatrix.from_quantized(Q_W), 1, 3000)
    assert set(counts) == {"100", "010", "001"}
    assert all(abs(c - 1000) < 150 for c in counts.values())
