"""Exact simulation of interaction-free measurement protocols."""

__version__ = "0.1.0"

from .elements import (
    Absorber,
    BeamSplitter,
    Coupler,
    Detector,
    Mirror,
    PhaseShift,
    Probe,
    TwoModeUnitary,
    apply_element,
    bs_matrix,
    coupler_matrix,
)
from .engine import (
    Circuit,
    ObjectSpec,
    OutcomeDistribution,
    TerminalEvent,
    conditional_state,
    evolve,
    negative_result_update,
    outcome_distribution,
    validate,
)
from .protocols import (
    dicke_localization,
    efficiency_frontier,
    ev_circuit,
    ev_repeated,
    ev_single_shot,
    hardy_conditional,
    hardy_run,
    zeno_run,
)
from .state import ABSORBED, PHOTON, BasisLabel, PureState, inner_product, project, superpose
from .tsvf import backward_states, forward_states, trace_free, two_state_vector, weak_value
