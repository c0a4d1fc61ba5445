import numpy as np
import pytest

from ppsq.demod import build_matrix
from ppsq.field import apply_unitary, inner_product, make_unitary
from ppsq.oracle import canonical_states, fidelity, ket, normalize
from ppsq.reconstruct import reconstruct
from ppsq.states import (
    InsufficientSequencesError,
    StateSpec,
    custom_coefficients,
    prepare,
    prepare_bell,
    prepare_custom,
    prepare_ghz,
    prepare_product,
    prepare_w,
)
from ppsq.sequences import build_sequence_set

BELL_PSI = [["(1,0)", "(0,1)"], ["(0,1)", "(1,0)"]]
BELL_PHI = [["(1,0)", "(0,1)"], ["(1,0)", "(0,1)"]]
GHZ = [["(1,0)", "(0,1)", "0"], ["0", "(1,0)", "(0,1)"], ["(0,1)", "0", "(1,0)"]]
W = [["(0,1)", "(1,0)", "(1,0)"]] * 3


def labels(ens):
    return build_matrix(ens).labels()


def test_spec_validation():
    with pytest.raises(ValueError):
        StateSpec("ghz", 4)
    with pytest.raises(ValueError):
        StateSpec("bell_psi_plus", 3)
    with pytest.raises(ValueError):
        StateSpec("custom", 1, [1, 1])
    with pytest.raises(ValueError):
        StateSpec("product", 0)
    assert StateSpec("bell-phi-plus", 2).kind == "bell_phi_plus"


def test_product_matrix(s2):
    assert labels(prepare_product(2, s2)) == [["(1,1)", "0"], ["0", "(1,1)"]]
    ens = prepare_product(10, s2)
    assert ens.n == 10 and all(f.N == 16 for f in ens.fields)


def test_insufficient_sequences(s2):
    with pytest.raises(InsufficientSequencesError):
        prepare_product(16, s2)
    with pytest.raises(InsufficientSequencesError):
        prepare_product(4, build_sequence_set(1))


@pytest.mark.parametrize(
    "ens_fn,expected",
    [
        (lambda s: prepare_bell("psi_plus", s), BELL_PSI),
        (lambda s: prepare_bell("phi_plus", s), BELL_PHI),
        (prepare_ghz, GHZ),
        (prepare_w, W),
    ],
)
def test_named_matrices(s2, ens_fn, expected):
    assert labels(ens_fn(s2)) == expected


def test_named_fields_normalized_and_distinct(s2):
    for ens in (prepare_bell("psi_plus", s2), prepare_ghz(s2), prepare_w(s2), prepare_product(4, s2)):
        assert len(set(ens.sequence_indices)) == ens.n
        for f in ens.fields:
            assert abs(inner_product(f, f) - 1) < 1e-9


def test_phi_plus_from_flip(s2):
    psi = prepare_bell("psi_plus", s2)
    flipped = apply_unitary(make_unitary(np.pi / 2, 0), psi.fields[1])
    phi = prepare_bell("phi_plus", s2)
    assert flipped.allclose(phi.fields[1])
    # same as swapping the modes, up to the global phase i
    assert np.allclose(flipped.mode0, 1j * psi.fields[1].mode1)


def test_w_splitter_matches_direct(s2):
    a = build_matrix(prepare_w(s2, via_splitters=True))
    b = build_matrix(prepare_w(s2, via_splitters=False))
    assert np.array_equal(a.quantized, b.quantized)
    assert np.allclose(a.raw, b.raw)


def test_unknown_bell_variant(s2):
    with pytest.raises(ValueError):
        prepare_bell("psi_minus", s2)


def test_custom_basis_state_is_diagonal(s2):
    amps = np.zeros(8)
    amps[0] = 1
    ens = prepare_custom(amps, s2)
    assert labels(ens) == [["(1,0)", "0", "0"], ["0", "(1,0)", "0"], ["0", "0", "(1,0)"]]
    assert not ens.diagnostics["collided"]


def test_custom_bell_block_structure(s2):
    ens = prepare_custom(canonical_states("bell_psi_plus"), s2)
    q = build_matrix(ens).quantized.any(axis=2)
    assert q.all()  # one irreducible 2x2 block, like the named Bell ensemble


@pytest.mark.parametrize("kind,n", [("bell_psi_plus", 2), ("bell_phi_plus", 2), ("product", 2), ("product", 1)])
def test_custom_two_qubit_round_trip(s2, kind, n):
    target = canonical_states(kind, n)
    ens = prepare_custom(target, s2)
    assert not ens.diagnostics["collided"]
    state = reconstruct(build_matrix(ens), "amplitude")
    assert fidelity(state.amplitudes, target) > 1 - 1e-9


@pytest.mark.parametrize("kind", ["ghz", "w", "product"])
def test_custom_three_qubit_families_collide(s2, kind):
    # both branches of the top split reuse lambda^(1); the diagnostic must say so
    ens = prepare_custom(canonical_states(kind, 3), s2)
    assert ens.diagnostics["collided"]
    assert ens.diagnostics["collisions"][0]["level"] == 3


def test_custom_ghz_binary(s2):
    ens = prepare_custom(canonical_states("ghz"), s2)
    assert fidelity(reconstruct(build_matrix(ens), "binary").amplitudes, canonical_states("ghz")) > 1 - 1e-9


def test_custom_complex_phases(s2):
    target = normalize(ket("00") + np.exp(0.9j) * ket("11") + 0.5j * ket("01"))
    ens = prepare_custom(target, s2)
    state = reconstruct(build_matrix(ens), "amplitude")
    assert fidelity(state.amplitudes, target) > 1 - 1e-9


def test_custom_resource_count(s2):
    rng = np.random.default_rng(3)
    for n in range(1, 8):
        amps = normalize(rng.normal(size=2**n) + 1j * rng.normal(size=2**n))
        ens = prepare_custom(amps, s2)
        assert ens.n == n and sorted(ens.sequence_indices) == list(range(1, n + 1))
        assert all(abs(f.norm() - 1) < 1e-9 for f in ens.fields)


def test_custom_collision_flagged():
    # dense three-qubit state: both branches reuse lambda^(1)
    amps = normalize(np.arange(1, 9, dtype=complex))
    _, collisions = custom_coefficients(amps, [1, 2, 3])
    assert collisions and collisions[0]["sequences"]


def test_custom_rejects_bad_input(s2):
    with pytest.raises(ValueError):
        prepare_custom([1, 0, 0], s2)
    with pytest.raises(ValueError):
        prepare_custom([1, 1], s2)
    with pytest.raises(ValueError):
        custom_coefficients([0, 0], [1])


def test_prepare_dispatch(s2):
    assert prepare(StateSpec("w", 3), s2).n == 3
    assert prepare(StateSpec("custom", 1, [1, 0]), s2).n == 1
