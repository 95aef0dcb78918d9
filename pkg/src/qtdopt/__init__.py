"""qtdopt: optimal single-mode probe states for quantum target detection.

Truncated Fock-space state toolkit, exact beam-splitter loss/noise channel,
Helstrom-bound discrimination, and an SQP optimizer that finds the probe
minimizing the detection error under energy and normalization constraints.
"""

from .channel import (
    ChannelConfig,
    ChannelOutput,
    TruncationOverflowError,
    TwoModeDensity,
    apply_bs_channel,
    bs_block_unitary,
    channel_superoperator,
    hypothesis_states,
    process_tensor_element,
    two_mode_output,
)
from .discrimination import (
    DegenerateSpectrumError,
    HypothesisPair,
    error_gradient,
    error_gradient_fd,
    error_probability,
    helstrom_error,
    helstrom_error_pure,
    quantum_advantage,
    trace_norm,
)
from .optimizer import (
    AllStartsFailedError,
    InfeasibleProblemError,
    Objective,
    OptimizationProblem,
    OptimizationResult,
    RankDeficientConstraintsError,
    SolverOptions,
    canonical_gauge,
    optimize_probe,
    solve_equality_qp,
    sqp_minimize,
)
from .states import (
    DEFAULT_DIM,
    DensityMatrix,
    FockVector,
    PhaseDistribution,
    TruncationError,
    WignerGrid,
    coherence,
    coherent_coefficients,
    counting_statistics,
    distribution_fidelity,
    fidelity,
    mean_photon,
    phase_distribution,
    phase_fwhm,
    phase_overlap,
    photon_variance,
    pnss,
    thermal_density,
    uniform_phase_distribution,
    vacuum_probability,
    wigner,
)
from .sweep import (
    BracketError,
    SweepPoint,
    SweepRecord,
    default_r_grid,
    find_transition_reflectivity,
    probe_record,
    sweep,
)

__version__ = "0.1.0"
