"""coqsim: exact simulation of optical coherent-state qubits.

Pure states are finite superpositions of multimode coherent states, closed
under every operation the protocols need, so probabilities and fidelities
carry no truncation error.  A dense truncated-Fock engine provides an
independent brute-force cross-check.
"""

from .states import (
    CoherentDensity,
    CoherentKet,
    CoherentTerm,
    TruncationError,
    fidelity_pure,
    number_amplitude,
    overlap,
)
from .fock import (
    CutoffPolicy,
    FockDensity,
    FockVector,
    beam_splitter_matrix,
    coherent_fock,
    coherent_tail,
    displacement_matrix,
    from_coherent_density,
    from_coherent_ket,
    number_projection,
    partial_trace,
)
from .encodings import (
    DegenerateQubitError,
    PM,
    QubitSpec,
    UnsupportedStateError,
    ZERO_ALPHA,
    convert_encoding,
    logical_X,
    logical_Z,
    logical_Z_physical,
    make_qubit,
    norm_factor,
    qubit_fidelity,
)
from .loss import (
    ChannelParams,
    DEFAULT_LOSS_PER_KM,
    ZErrorMixture,
    channel_mixture,
    encoding_equivalence_witness,
    error_prob,
    multi_mode_transmit,
    transmit,
)
from .protocols import (
    BellSpec,
    HadamardOutcomes,
    HadamardReport,
    HADAMARD_CORRECTIONS,
    OutcomeRecord,
    apply_Z_by_reteleport,
    approx_displace,
    bell_via_cat,
    derive_hadamard_corrections,
    hadamard,
    hadamard_angle,
    hadamard_mode,
    hadamard_outcomes,
    hadamard_postselect,
    hadamard_report,
    hadamard_spec,
    make_bell,
    make_cat,
    protected_hadamard,
    restore_amplitude,
    restore_success_prob,
    teleport,
    teleport_mode,
    teleport_success_prob,
)
from .ecc import (
    CodeParams,
    DecodeResult,
    EndToEndResult,
    SyndromeRecord,
    apply_logical_H_blockwise,
    boost_amplitude,
    code_success_prob,
    decode_and_correct,
    encode,
    end_to_end,
    estimate_amplitude,
    general_code_success,
    ideal_hadamard_mode,
)

__version__ = "0.1.0"
