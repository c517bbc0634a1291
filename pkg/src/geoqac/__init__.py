"""Constant-depth quantum circuits with geometrically local multi-qubit CZ gates."""

from .boolean import BooleanFunction, majority, parity
from .bounds import (
    BoundReport,
    bound_experiment,
    contiguous_parity_bound,
    majority_bound,
    nekomata_distance,
    parity_bound,
    tv_gap,
    unitary_phase_gap,
)
from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    GeneralizedToffoli,
    Layer,
    Layout,
    MultiCZGate,
    SingleQubitGate,
    compose,
    erase,
    inverse,
    validate,
)
from .codec import codec_roundtrip, load, save
from .compiler import embed_circuit_2d, embed_layer_2d, long_range_cnot_gadget, verify_embedding
from .fourier import FourierSpectrum, balanced_assignment_prob, majority_weight1_closed, spectrum, weight
from .lightcone import (
    AnalysisError,
    LightCone,
    SeparabilityCertificate,
    backward_disjoint_select,
    backward_lightcone,
    check_separable,
    erase_gate,
    forward_lightcone,
    gate_weight,
    independent_set_deg2,
    structure_select_1d,
    width2_structure_select,
)
from .metrics import fidelity, jacobi_eigvalsh, partial_trace, trace_distance, tv_distance
from .restriction import RestrictionOutcome, contiguous_restriction, restriction_pipeline_1d
from .simulator import StateVector, avg_success, evolve, f_eval, run, run_sparse
from .synthesis import (
    amplitude_calibration,
    appendix_d_counterexample,
    build_c2,
    cat_1d,
    parity_line,
    parity_recursive_2d,
    parity_width2,
    restricted_fanout,
)

__version__ = "0.1.0"
