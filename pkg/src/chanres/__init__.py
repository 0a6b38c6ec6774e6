"""Resource content of quantum channels via discrimination games.

Certified computation of coherence measures of states, resource
generating/increasing powers of channels, and success probabilities of
discriminating a channel from the convex classes of coherence-free
channels, at desk scale (dimensions 2 to 4) with dual certificates on
every optimization.
"""

__version__ = "0.1.0"

from .errors import (
    AssertionMismatch,
    ChanresError,
    DimensionMismatch,
    Infeasible,
    MaxIterations,
    NoConvergence,
    NonSquare,
    NotHermitian,
    NotPSD,
    NotUnitary,
    UnsupportedCombination,
    UnsupportedFreeSet,
    ValidationError,
)
from .linalg import herm_eig, kron, partial_trace, partial_transpose, trace_norm
from .objects import (
    DensityMatrix,
    FreeChannelClass,
    QuantumChannel,
    adjoint_channel,
    apply_channel,
    certify_io_kraus,
    certify_sio_kraus,
    channel_from_dict,
    channel_to_dict,
    choi_to_kraus,
    compose_channels,
    dephasing_channel,
    haar_random_unitary,
    identity_channel,
    is_dio,
    is_mio,
    kraus_to_choi,
    load_channel,
    mix_channels,
    random_channel,
    random_density_matrix,
    random_pure_state,
    replacement_channel,
    tensor_channels,
    unitary_channel,
)
from .solver import (
    CertifiedSolution,
    ConvexProblem,
    minimize_trace_norm,
    project_channel_class,
    project_psd,
    write_trace_csv,
)
from .measures import (
    CoherenceResult,
    DistanceMeasure,
    E1Bound,
    FreeStateSet,
    c_l1,
    c_robustness,
    c_trace,
    distance,
    e1_ppt_bound,
    fidelity,
    max_relative_entropy,
    omega,
    omega_certified,
)
from .power import (
    PowerReport,
    PropertySuiteReport,
    channel_power_report,
    generating_power,
    increasing_power_search,
    property_suite,
    qubit_unitary_power,
)
from .discrimination import (
    AdvantageReport,
    CollapseReport,
    DiscriminationResult,
    ExplorationResult,
    advantage,
    explore_coherent_probe_advantage,
    game_transcript,
    helstrom,
    p_succ_free_probes,
    p_succ_incoherent_povm,
    p_succ_vs_class,
    verify_incoherent_povm_collapse,
)
from .suites import SUITE_TAGS, SuiteReport, run_suite
