"""Reuse-architecture Rydberg array combining simulator.

Structured analog combiners (shared local oscillators and photodiode
adders), alternating-minimization combiner design under finite or
continuous phase resolution, and Monte-Carlo spectral-efficiency
evaluation over clustered mmWave channels.
"""

from .architecture import (AnalogCombiner, ReuseArchitecture, build_combiner,
                           build_wlc, build_wlo, compose_wrf,
                           default_intra_offsets, is_proportional, phase_grid)
from .arrays import (ArrayGeometry, ArrayKind, array_response, axial_response,
                     rydberg_response, upa_response)
from .channel import (ChannelParams, ChannelRealization, PathMeta,
                      channel_matrix, draw_paths, generate_channel)
from .errors import (ArchitectureError, ConfigError, GeometryError,
                     NumericError)
from .evaluation import (EvalUnit, ExperimentSpec, ResultRow, ResultTable,
                         combined_gain_eigenvalues, conventional_pc_baseline,
                         evaluate_architecture, fully_digital_se,
                         pc_architecture, run_convergence, run_experiment,
                         spectral_efficiency)
from .optimizer import (CombinerSolution, DigitalReference, OptimizerConfig,
                        SolveMethod, alternating_minimize,
                        direct_solve_proportional, optimal_digital_combiner,
                        optimal_phase, quantize_phase, solve_combiner,
                        update_wbb)

__version__ = "0.1.0"

__all__ = [
    "AnalogCombiner", "ArchitectureError", "ArrayGeometry", "ArrayKind",
    "ChannelParams", "ChannelRealization", "CombinerSolution", "ConfigError",
    "DigitalReference", "EvalUnit", "ExperimentSpec", "GeometryError",
    "NumericError", "OptimizerConfig", "PathMeta", "ResultRow", "ResultTable",
    "ReuseArchitecture", "SolveMethod", "alternating_minimize",
    "array_response", "axial_response", "build_combiner", "build_wlc",
    "build_wlo", "channel_matrix", "combined_gain_eigenvalues", "compose_wrf",
    "conventional_pc_baseline", "default_intra_offsets",
    "direct_solve_proportional", "draw_paths", "evaluate_architecture",
    "fully_digital_se", "generate_channel", "is_proportional",
    "optimal_digital_combiner", "optimal_phase", "pc_architecture",
    "phase_grid", "quantize_phase", "run_convergence", "run_experiment",
    "solve_combiner", "spectral_efficiency", "update_wbb", "upa_response",
    "rydberg_response",
]
