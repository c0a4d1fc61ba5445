"""Classical two-mode fields modulated with pseudorandom phase sequences.

Pipeline: GF(4) m-sequence phase sets -> field ensembles for target states ->
quadrature demodulation into a mode status matrix -> state reconstruction,
checked against a dense state-vector oracle.
"""

from ppsq.sequences import (
    PhaseSequence,
    SequenceSet,
    build_sequence_set,
    correlation,
    find_primitive_polynomials,
    lfsr_generate,
    match_paper_sequence,
    verify_set_properties,
)
from ppsq.field import (
    ClassicalField,
    FieldEnsemble,
    apply_unitary,
    beam_split,
    inner_product,
    make_unitary,
    mode_split,
    modulate,
    superpose,
)
from ppsq.demod import (
    ModeStatus,
    ModeStatusMatrix,
    build_matrix,
    demodulate_field,
    demodulate_phase,
    measure_amplitudes,
    rebuild_fields,
)
from ppsq.reconstruct import (
    BlockDecomposition,
    NonReconstructibleError,
    StateVector,
    decompose_blocks,
    reconstruct,
    reconstruct_block,
    sample_measurement,
    schedule_permutations,
)
from ppsq.states import (
    StateSpec,
    prepare,
    prepare_bell,
    prepare_custom,
    prepare_ghz,
    prepare_product,
    prepare_w,
)

__version__ = "0.1.0"
