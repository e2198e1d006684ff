"""Stochastic jump unravelling of single-particle localisation.

Each trajectory is a wave function following the Schrodinger equation,
interrupted by localisation jumps at Poisson times of rate lam.  A jump
at centre r multiplies the wave function by the Gaussian kernel
l(x, r) and renormalises; the centre is drawn from the exact density

    p(r) = int l(r, x)^2 |psi(x)|^2 dx,

discretised with the r integral running over the position grid.  The
empirical average of |psi><psi| over trajectories converges to the
master-equation density at the Monte Carlo rate 1/sqrt(M).

Determinism: trajectory k of a run seeded with s uses its own PCG64
generator seeded from SeedSequence((s, k)).  Each trajectory draws its
waiting times first, then one uniform per jump for the centre, so
results are identical whether trajectories run alone, in a different
batch split, or under a different BLAS thread count; nothing here
reduces across trajectories except the final, index-ordered average.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError, JumpDegenerateError
from .master import (DensityField, apply_hamiltonian, check_potential_domain,
                     stability_bound)
from .model import (CollapseKernel, GrwParams, collapse_kernel_value,
                    potential_on_grid)
from .numerics import GridSpec, trapezoid_integrate, trapezoid_weights


@dataclass
class WaveField:
    """Wave function sampled on a grid."""

    grid: GridSpec
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape != (self.grid.n_points,):
            raise DimensionError(
                f"wave function has shape {psi.shape} for a "
                f"{self.grid.n_points}-point grid")
        self.psi = psi

    def norm(self) -> float:
        return float(np.sqrt(trapezoid_integrate(np.abs(self.psi) ** 2,
                                                 self.grid)))

    def density(self) -> DensityField:
        return DensityField(self.grid, np.outer(self.psi, self.psi.conj()),
                            self.time)


@dataclass
class TrajectoryRecord:
    """One realised trajectory: jump history plus the final wave function."""

    seed: int
    traj_index: int
    jump_times: np.ndarray
    jump_centers: np.ndarray
    final: WaveField


def trajectory_rng(seed: int, traj_index: int) -> np.random.Generator:
    """The per-trajectory generator; splitting is by (seed, index) pair."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed, traj_index))))


def _schrodinger_rhs(psi, grid, params, v):
    return (-1j / params.hbar) * apply_hamiltonian(psi, grid, params,
                                                   axis=-1, v_grid=v)


def _rk4_psi(psi, grid, params, v, dt):
    k1 = _schrodinger_rhs(psi, grid, params, v)
    k2 = _schrodinger_rhs(psi + (0.5 * dt) * k1, grid, params, v)
    k3 = _schrodinger_rhs(psi + (0.5 * dt) * k2, grid, params, v)
    k4 = _schrodinger_rhs(psi + dt * k3, grid, params, v)
    return psi + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def schrodinger_step(wave: WaveField, params: GrwParams, dt: float) -> WaveField:
    """One RK4 step of the between-jump Schrodinger equation."""
    if dt <= 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    if params.kinetic and dt > stability_bound(wave.grid, params):
        raise ConfigurationError(
            f"dt = {dt:g} exceeds the kinetic stability bound "
            f"{stability_bound(wave.grid, params):g}")
    check_potential_domain(wave.grid, params)
    v = potential_on_grid(params.potential, wave.grid, params.mass)
    return WaveField(wave.grid, _rk4_psi(wave.psi, wave.grid, params, v, dt),
                     wave.time + dt)


def _squared_kernel_matrix(grid: GridSpec, r_c: float) -> np.ndarray:
    """l(r_i, x_j)^2 on the grid mesh, rows indexed by jump centre."""
    pts = grid.points()
    kernel = CollapseKernel(r_c)
    return collapse_kernel_value(kernel, pts[None, :], pts[:, None]) ** 2


def _center_from_uniform(psi, grid, wsq, u):
    """Invert the discrete jump-centre CDF at quantile u."""
    w = trapezoid_weights(grid)
    p = wsq @ (np.abs(psi) ** 2 * w)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * grid.dx)))
    total = cdf[-1]
    if not np.isfinite(total) or total <= 0.0:
        raise DomainError("jump-centre distribution has no mass on the grid")
    return float(np.interp(u, cdf / total, grid.points()))


def sample_jump_center(wave: WaveField, kernel: CollapseKernel,
                       rng: np.random.Generator) -> float:
    """Draw one jump centre from p(r) = int l(r, x)^2 |psi|^2 dx.

    Inverse-CDF sampling on the trapezoid cumulative, with linear
    interpolation between grid points, so centres are continuous.
    """
    wsq = _squared_kernel_matrix(wave.grid, kernel.r_c)
    return _center_from_uniform(wave.psi, wave.grid, wsq, rng.uniform())


def apply_jump(wave: WaveField, kernel: CollapseKernel,
               center: float) -> WaveField:
    """Multiply by l(center, x) and renormalise."""
    lpsi = collapse_kernel_value(kernel, wave.grid.points(), center) * wave.psi
    nrm = float(np.sqrt(trapezoid_integrate(np.abs(lpsi) ** 2, wave.grid)))
    if nrm < 1e-12:
        raise JumpDegenerateError(
            f"jump at centre {center:g} leaves norm {nrm:.3e}")
    return WaveField(wave.grid, lpsi / nrm, wave.time)


def _draw_schedule(rng, lam, t_start, t_final):
    """Waiting times first, then one centre uniform per jump."""
    times = []
    if lam > 0.0:
        t = t_start + rng.exponential(1.0 / lam)
        while t < t_final:
            times.append(t)
            t += rng.exponential(1.0 / lam)
    uniforms = rng.uniform(size=len(times))
    return np.array(times), np.asarray(uniforms)


def _advance_row(psi, grid, params, v, wsq, kernel, t_left, t_right,
                 jump_times, uniforms, centers_out):
    """March one row across (t_left, t_right], applying its jumps."""
    t = t_left
    for tau, u in zip(jump_times, uniforms):
        if tau - t > 0.0:
            psi = _rk4_psi(psi, grid, params, v, tau - t)
            t = tau
        center = _center_from_uniform(psi, grid, wsq, u)
        centers_out.append(center)
        lvals = collapse_kernel_value(kernel, grid.points(), center)
        lpsi = lvals * psi
        nrm = float(np.sqrt(trapezoid_integrate(np.abs(lpsi) ** 2, grid)))
        if nrm < 1e-12:
            raise JumpDegenerateError(
                f"jump at centre {center:g} leaves norm {nrm:.3e}")
        psi = lpsi / nrm
    if t_right - t > 0.0:
        psi = _rk4_psi(psi, grid, params, v, t_right - t)
    return psi


def _interval_boundaries(t_start, t_final, dt):
    n_int = max(1, int(np.ceil((t_final - t_start) / dt - 1e-12)))
    bounds = t_start + dt * np.arange(n_int + 1)
    bounds[-1] = t_final
    return bounds


@dataclass
class EnsembleResult:
    records: list
    samples: list


def run_trajectory(wave: WaveField, params: GrwParams, t_final: float,
                   dt: float, seed: int, traj_index: int = 0) -> TrajectoryRecord:
    """Run one trajectory on the shared global step grid.

    Interval boundaries are multiples of dt (plus a short final one);
    jumps inside an interval split it into partial RK4 steps.  Identical
    arithmetic to the same trajectory inside run_ensemble.
    """
    result = run_ensemble(wave, params, t_final, dt, n_traj=1, seed=seed,
                          first_index=traj_index)
    return result.records[0]


def run_ensemble(wave: WaveField, params: GrwParams, t_final: float,
                 dt: float, n_traj: int, seed: int, sample_every: int = 0,
                 first_index: int = 0) -> EnsembleResult:
    """Run n_traj trajectories with indices first_index onward.

    All trajectories march the same global interval grid; rows without a
    jump in an interval advance as one block, which is arithmetically
    identical to advancing them alone.  With sample_every > 0 the
    ensemble density is recorded every that many boundaries (plus the
    final time).
    """
    if n_traj < 1:
        raise ConfigurationError(f"n_traj must be >= 1, got {n_traj}")
    if t_final <= wave.time:
        raise ConfigurationError(
            f"t_final = {t_final:g} is not after the wave time {wave.time:g}")
    if dt <= 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    if params.kinetic and dt > stability_bound(wave.grid, params):
        raise ConfigurationError(
            f"dt = {dt:g} exceeds the kinetic stability bound "
            f"{stability_bound(wave.grid, params):g}")
    check_potential_domain(wave.grid, params)

    grid = wave.grid
    v = potential_on_grid(params.potential, grid, params.mass)
    kernel = CollapseKernel(params.r_c)
    wsq = _squared_kernel_matrix(grid, params.r_c)

    schedules = []
    for k in range(n_traj):
        rng = trajectory_rng(seed, first_index + k)
        times, uniforms = _draw_schedule(rng, params.lam, wave.time, t_final)
        schedules.append((times, uniforms))
    next_jump = np.array([s[0][0] if len(s[0]) else np.inf for s in schedules])
    jump_ptr = np.zeros(n_traj, dtype=int)
    centers = [[] for _ in range(n_traj)]

    psi_all = np.tile(wave.psi, (n_traj, 1))
    bounds = _interval_boundaries(wave.time, t_final, dt)
    samples = []

    for b in range(len(bounds) - 1):
        t_left, t_right = bounds[b], bounds[b + 1]
        step = t_right - t_left
        jumping = next_jump <= t_right
        quiet = ~jumping
        if np.any(quiet):
            psi_all[quiet] = _rk4_psi(psi_all[quiet], grid, params, v, step)
        for row in np.nonzero(jumping)[0]:
            times, uniforms = schedules[row]
            lo = jump_ptr[row]
            hi = lo + np.searchsorted(times[lo:], t_right, side="right")
            psi_all[row] = _advance_row(
                psi_all[row], grid, params, v, wsq, kernel, t_left, t_right,
                times[lo:hi], uniforms[lo:hi], centers[row])
            jump_ptr[row] = hi
            next_jump[row] = times[hi] if hi < len(times) else np.inf
        if sample_every > 0 and (b + 1) % sample_every == 0 \
                and b + 1 < len(bounds) - 1:
            samples.append(ensemble_density(psi_all, grid, time=t_right))
    if sample_every > 0:
        samples.append(ensemble_density(psi_all, grid, time=t_final))

    records = []
    for k in range(n_traj):
        times, _ = schedules[k]
        records.append(TrajectoryRecord(
            seed=seed, traj_index=first_index + k, jump_times=times,
            jump_centers=np.array(centers[k]),
            final=WaveField(grid, psi_all[k].copy(), t_final)))
    return EnsembleResult(records, samples)


def ensemble_density(states, grid: GridSpec = None,
                     time: float = None) -> DensityField:
    """Average |psi><psi| over a collection, in index order.

    Accepts a sequence of TrajectoryRecord or WaveField, or a (M, n) array.
    The accumulation is an explicit loop over trajectory index, so the
    result is independent of batching and thread count.
    """
    if isinstance(states, np.ndarray):
        if grid is None:
            raise DimensionError("grid is required for a bare array of states")
        rows = states
        t = 0.0 if time is None else time
    else:
        waves = [s.final if isinstance(s, TrajectoryRecord) else s
                 for s in states]
        if not waves:
            raise DomainError("cannot average an empty ensemble")
        if grid is None:
            grid = waves[0].grid
        for wv in waves:
            if wv.grid != grid:
                raise DimensionError("ensemble members live on different grids")
        rows = np.stack([wv.psi for wv in waves])
        t = waves[0].time if time is None else time
    if rows.ndim != 2 or rows.shape[1] != grid.n_points:
        raise DimensionError(
            f"state array has shape {rows.shape} for a "
            f"{grid.n_points}-point grid")
    acc = np.zeros((grid.n_points, grid.n_points), dtype=complex)
    for row in rows:
        acc += np.outer(row, row.conj())
    return DensityField(grid, acc / rows.shape[0], t)
