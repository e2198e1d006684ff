"""Single-particle density-matrix evolution under spontaneous localisation.

Four mutually validating solvers for the same 1-D model: a position-
basis master equation (master), a dense vectorised exponential for
small grids (superop), short-time kernel composition with interleaved
collapse factors (pathint), and a stochastic jump unravelling
(unravel).  limits provides the phase-space view and the quantum and
classical limit checks; scenarios holds ready benchmark setups; io and
cli cover snapshots, plot data, and command-line runs.
"""

__version__ = "0.1.0"

from .errors import (BadMagicError, ConfigKeyError, ConfigurationError,
                     DimensionError, DomainError, DomainEscapeError,
                     EdgeMassError, FormatVersionError, GrwSimError,
                     JumpDegenerateError, SnapshotFormatError,
                     TransformFidelityError, TruncatedSnapshotError,
                     ValidationError)
from .numerics import (GridSpec, fourier_row_transform, hermitize,
                       trapezoid_integrate, trapezoid_weights)
from .model import (CollapseKernel, Free, GrwParams, Harmonic, Tabulated,
                    collapse_kernel_value, damping_matrix, damping_rate,
                    gaussian_overlap, overlap_matrix, potential_gradient,
                    potential_on_grid, potential_value)
from .master import (DensityField, DiagnosticsSeries, apply_hamiltonian,
                     dissipator, evolve, stability_bound, step_rk4,
                     trace_distance, unitary_generator)
from .superop import (EffectiveHamiltonian, VectorizedState,
                      build_effective_hamiltonian, devectorize,
                      evolve_exponential, hamiltonian_matrix,
                      segment_propagator, vectorize)
from .pathint import (CollapseFactor, PathIntegralResult, ShortTimeKernel,
                      build_collapse_factor, build_kernel, min_epsilon,
                      propagate, step_density)
from .unravel import (EnsembleResult, TrajectoryRecord, WaveField,
                      apply_jump, ensemble_density, run_ensemble,
                      run_trajectory, sample_jump_center, schrodinger_step,
                      trajectory_rng)
from .limits import (CoherenceReport, PhaseField, QuantumLimitReport,
                     aligned_delta_grid, coherence_report, fringe_visibility,
                     l1_distance, liouville_reference, quantum_limit_check,
                     to_phase_space)
from .scenarios import (Scenario, gaussian_packet, gaussian_wave,
                        harmonic_classical_scenario, mixed_gaussian_blobs,
                        preset, preset_names, two_gaussian_superposition,
                        with_grid)
from .io import (FieldFileHeader, RunConfig, RunResult, emit_plot_data,
                 parse_config, read_density, read_header, run, solve_final,
                 write_density)
