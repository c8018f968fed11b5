"""Fidelity signatures of N-spin pure states and their collective-unitary symmetry."""

__version__ = "0.1.0"

from .core import (
    DensityMatrix,
    SpinState,
    apply_unitary,
    basis_state,
    density,
    parse_state,
    random_state,
    reduce,
    serialize_state,
    tensor,
)
from .fidelity import (
    bloch_vector,
    fidelity,
    fidelity_povm_oracle,
    fidelity_squared,
    helstrom_error,
    relative_angle,
    trace_distance,
)
from .signature import (
    FidelitySignature,
    PairFamily,
    enumerate_pairs,
    signature,
    signature_distance,
    signatures_equal,
)
from .symmetry import (
    collective,
    distance_to_collective,
    falsification_experiment,
    haar_random_u2,
    haar_random_unitary,
    pu2_to_so3,
    u2_from_params,
    verify_collective_invariance,
)
from .equivalence import (
    MicroMacroConfig,
    macro_state,
    micro_state,
    micromacro_table,
    non_collectivity_witness,
    relabel_unitary,
    search_state_with_signature,
)
from .game import GameConfig, Lab, postulate1_check, run_game

__all__ = [
    "DensityMatrix",
    "SpinState",
    "apply_unitary",
    "basis_state",
    "density",
    "parse_state",
    "random_state",
    "reduce",
    "serialize_state",
    "tensor",
    "bloch_vector",
    "fidelity",
    "fidelity_povm_oracle",
    "fidelity_squared",
    "helstrom_error",
    "relative_angle",
    "trace_distance",
    "FidelitySignature",
    "PairFamily",
    "enumerate_pairs",
    "signature",
    "signature_distance",
    "signatures_equal",
    "collective",
    "distance_to_collective",
    "falsification_experiment",
    "haar_random_u2",
    "haar_random_unitary",
    "pu2_to_so3",
    "u2_from_params",
    "verify_collective_invariance",
    "MicroMacroConfig",
    "macro_state",
    "micro_state",
    "micromacro_table",
    "non_collectivity_witness",
    "relabel_unitary",
    "search_state_with_signature",
    "GameConfig",
    "Lab",
    "postulate1_check",
    "run_game",
]
