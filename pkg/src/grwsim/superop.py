"""Small-grid oracle: exact exponential of the vectorised generator.

Stacking the density matrix into a vector psi[m n + k] = rho_mk dx turns
the master equation into a linear ODE with the non-Hermitian effective
Hamiltonian

    H_eff = H (x) 1 - 1 (x) H^T - i hbar lam (1 - D),

where D is diagonal in the doubled position basis with entries
overlap(x_m, x_k).  The state at time t is then a single dense matrix
exponential, exp(-i H_eff t / hbar) psi(0), with no time-step error at
all.  Cost is O(n^6), so grids are capped; this solver exists to
cross-check the RK4 master solver on small problems, not to scale.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ConfigurationError, DimensionError
from .master import DensityField, check_potential_domain
from .model import GrwParams, overlap_matrix, potential_on_grid
from .numerics import GridSpec

GRID_CAP = 48


@dataclass
class VectorizedState:
    """Column-stacked density, psi[m n + k] = rho(x_m, x_k) dx."""

    grid: GridSpec
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        n = self.grid.n_points
        if psi.shape != (n * n,):
            raise DimensionError(
                f"vectorised state has shape {psi.shape}, expected ({n * n},)")
        self.psi = psi


@dataclass
class EffectiveHamiltonian:
    """Dense vectorised generator; evolution is exp(-i matrix t / hbar)."""

    grid: GridSpec
    matrix: np.ndarray
    hbar: float

    def __post_init__(self):
        n2 = self.grid.n_points**2
        if self.matrix.shape != (n2, n2):
            raise DimensionError(
                f"effective Hamiltonian has shape {self.matrix.shape}, "
                f"expected ({n2}, {n2})")


def vectorize(field: DensityField) -> VectorizedState:
    """Stack rows of rho, scaled by dx so the diagonal sums to the trace."""
    return VectorizedState(field.grid, (field.rho * field.grid.dx).ravel(),
                           field.time)


def devectorize(state: VectorizedState) -> DensityField:
    n = state.grid.n_points
    return DensityField(state.grid, state.psi.reshape(n, n) / state.grid.dx,
                        state.time)


def hamiltonian_matrix(grid: GridSpec, params: GrwParams) -> np.ndarray:
    """Dense form of the shared finite-difference H (hard-wall)."""
    check_potential_domain(grid, params)
    n = grid.n_points
    h = np.zeros((n, n))
    if params.kinetic:
        coef = -params.hbar**2 / (2.0 * params.mass * grid.dx**2)
        h += coef * (np.diag(np.full(n, -2.0))
                     + np.diag(np.ones(n - 1), 1)
                     + np.diag(np.ones(n - 1), -1))
    h += np.diag(potential_on_grid(params.potential, grid, params.mass))
    return h


def build_effective_hamiltonian(grid: GridSpec, params: GrwParams,
                                cap: int = GRID_CAP) -> EffectiveHamiltonian:
    """Assemble the n^2 x n^2 vectorised generator.

    Refuses grids above the cap before allocating anything; the memory
    and expm cost grow like n^4 and n^6.
    """
    if grid.n_points > cap:
        raise ConfigurationError(
            f"grid has {grid.n_points} points, above the dense-superoperator "
            f"cap of {cap}")
    h = hamiltonian_matrix(grid, params)
    eye = np.eye(grid.n_points)
    mat = np.kron(h, eye) - np.kron(eye, h.T)
    mat = mat.astype(complex)
    if params.lam != 0.0:
        overlap_diag = overlap_matrix(grid, params.r_c).ravel()
        mat -= 1j * params.hbar * params.lam * np.diag(1.0 - overlap_diag)
    return EffectiveHamiltonian(grid, mat, params.hbar)


def segment_propagator(h_eff: EffectiveHamiltonian, dt: float) -> np.ndarray:
    """Dense propagator exp(-i H_eff dt / hbar) for one time span."""
    if dt < 0:
        raise ConfigurationError(f"time span must be >= 0, got {dt}")
    return expm((-1j * dt / h_eff.hbar) * h_eff.matrix)


def evolve_exponential(state: VectorizedState, h_eff: EffectiveHamiltonian,
                       t_final: float) -> VectorizedState:
    """Propagate to t_final with one dense matrix exponential."""
    if t_final < state.time:
        raise ConfigurationError(
            f"t_final = {t_final:g} is before the state time {state.time:g}")
    if state.grid != h_eff.grid:
        raise DimensionError("state and effective Hamiltonian grids differ")
    u = segment_propagator(h_eff, t_final - state.time)
    return VectorizedState(state.grid, u @ state.psi, t_final)
