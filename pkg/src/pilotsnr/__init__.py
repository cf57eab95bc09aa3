"""Training-signal design and channel tracking for correlated MISO downlinks.

The package simulates block-fading channels confined to a low-rank spatial
subspace, tracks them with a Kalman filter across training blocks, and
designs the per-block training signals. Designs include a semidefinite
relaxation maximizing the expected post-training data SNR, a matching
estimation-error minimizer, a memoryless closed-form water-filling design,
and round-robin and random baselines. ``experiment`` wires these into a
reproducible Monte Carlo comparison with CSV output; ``cli`` exposes it on
the command line.
"""

from .channel import (
    ChannelState,
    ChannelSubspace,
    JakesParams,
    SpatialCorrelation,
    build_exponential_correlation,
    eigen_subspace,
    jakes_coefficient,
)
from .design import (
    DegeneratePilotWarning,
    PilotMatrix,
    RandomizationConfig,
    SolverConvergenceWarning,
    WaterfillSolution,
    design_block_iid,
    design_mse_min,
    design_orthogonal_baseline,
    design_random_baseline,
    design_sdr,
    factorize_or_randomize,
    waterfill_nu,
    waterfill_pilot,
)
from .experiment import (
    ConfigError,
    CurvePoint,
    ExperimentConfig,
    emit_csv,
    load_config,
    parse_config_text,
    parse_csv,
    run_detailed,
    run_experiment,
    run_metadata,
)
from .kalman import (
    KalmanBelief,
    KalmanPosterior,
    Observation,
    batch_mmse_oracle,
    initial_belief,
    nmse,
    predict,
    simulate_observation,
    update,
)
from .sdp import SolverConfig, SolverResult, kkt_residual, solve_trace_inverse_sdp
from .snr import (
    DesignObjective,
    build_objective,
    expected_snr_analytic,
    objective_value,
    optimal_beamformer,
    optimal_snr,
    received_snr,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelState",
    "ChannelSubspace",
    "ConfigError",
    "CurvePoint",
    "DegeneratePilotWarning",
    "DesignObjective",
    "ExperimentConfig",
    "JakesParams",
    "KalmanBelief",
    "KalmanPosterior",
    "Observation",
    "PilotMatrix",
    "RandomizationConfig",
    "SolverConfig",
    "SolverConvergenceWarning",
    "SolverResult",
    "SpatialCorrelation",
    "WaterfillSolution",
    "batch_mmse_oracle",
    "build_exponential_correlation",
    "build_objective",
    "design_block_iid",
    "design_mse_min",
    "design_orthogonal_baseline",
    "design_random_baseline",
    "design_sdr",
    "eigen_subspace",
    "emit_csv",
    "expected_snr_analytic",
    "factorize_or_randomize",
    "initial_belief",
    "jakes_coefficient",
    "kkt_residual",
    "load_config",
    "nmse",
    "objective_value",
    "optimal_beamformer",
    "optimal_snr",
    "parse_config_text",
    "parse_csv",
    "predict",
    "received_snr",
    "run_detailed",
    "run_experiment",
    "run_metadata",
    "simulate_observation",
    "solve_trace_inverse_sdp",
    "update",
    "waterfill_nu",
    "waterfill_pilot",
]
