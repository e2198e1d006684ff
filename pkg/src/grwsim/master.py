"""Position-basis master-equation solver.

The ensemble-averaged density matrix obeys

    d rho/dt = -(i/hbar) [H, rho] - Gamma(x, y) rho(x, y),
    Gamma(x, y) = lam (1 - exp(-(x - y)^2 / (4 r_c^2))),

unitary evolution plus pointwise damping of position coherence.  H is
discretised with second-order central differences and hard-wall (zero
outside the grid) boundaries, so runs are only trustworthy while the
state keeps away from the edges; evolve() monitors the outer cells and
raises once they start filling up.

Time stepping is classical RK4 with re-Hermitisation after every step.
The commutator is traceless and the damping vanishes on the diagonal,
so the trace is preserved to rounding by construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, EdgeMassError, ValidationError
from .model import GrwParams, Tabulated, damping_matrix, potential_on_grid
from .numerics import GridSpec, herm_residue, hermitize, trapezoid_weights


@dataclass
class DensityField:
    """Density matrix sampled on a grid: rho[i, j] = rho(x_i, x_j)."""

    grid: GridSpec
    rho: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        n = self.grid.n_points
        if rho.shape != (n, n):
            raise DimensionError(
                f"density has shape {rho.shape} for a {n}-point grid")
        self.rho = rho

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.rho.copy(), self.time)

    def trace(self) -> float:
        """Trapezoid quadrature of the diagonal."""
        w = trapezoid_weights(self.grid)
        return float(np.real(np.diagonal(self.rho) @ w))

    def purity(self) -> float:
        """tr(rho^2) dx^2, the probability-weighted purity (1 for pure states)."""
        return float(np.real(np.sum(self.rho * self.rho.T))) * self.grid.dx**2

    def herm_residue(self) -> float:
        return herm_residue(self.rho)

    def min_eigenvalue(self) -> float:
        """Smallest probability eigenvalue of the density operator (rho dx)."""
        return float(np.linalg.eigvalsh(hermitize(self.rho))[0]) * self.grid.dx

    def offdiag_mass(self, r_c: float, factor: float = 3.0) -> float:
        """sum |rho_ij|^2 dx^2 over entries with |x_i - x_j| > factor * r_c."""
        pts = self.grid.points()
        mask = np.abs(pts[:, None] - pts[None, :]) > factor * r_c
        return float(np.sum(np.abs(self.rho[mask]) ** 2)) * self.grid.dx**2

    def edge_mass(self, edge_fraction: float = 0.05) -> float:
        """Diagonal mass in the outer edge_fraction of cells on each side."""
        n = self.grid.n_points
        k = max(1, int(np.ceil(edge_fraction * n)))
        w = trapezoid_weights(self.grid)
        diag = np.abs(np.real(np.diagonal(self.rho)))
        return float(diag[:k] @ w[:k] + diag[n - k:] @ w[n - k:])

    def validate(self, trace_tol: float = 1e-8, herm_tol: float = 1e-10,
                 check_positivity: bool = False, eig_tol: float = 1e-8) -> None:
        """Raise ValidationError if trace, Hermiticity, or positivity fail."""
        problems = []
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            problems.append(f"|trace - 1| = {abs(tr - 1.0):.3e} > {trace_tol:g}")
        hr = self.herm_residue()
        if hr > herm_tol:
            problems.append(f"hermiticity residue {hr:.3e} > {herm_tol:g}")
        if check_positivity:
            ev = self.min_eigenvalue()
            if ev < -eig_tol:
                problems.append(f"min eigenvalue {ev:.3e} < -{eig_tol:g}")
        if problems:
            raise ValidationError("; ".join(problems))


def trace_distance(a: DensityField, b: DensityField) -> float:
    """(1/2) tr |a - b| of the density operators (eigenvalues of rho dx)."""
    if a.grid != b.grid:
        raise DimensionError("density fields live on different grids")
    diff = hermitize(a.rho - b.rho)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff)))) * a.grid.dx


def _second_difference_last(arr: np.ndarray) -> np.ndarray:
    """Hard-wall second difference along the last axis (zero outside)."""
    out = np.empty_like(arr)
    out[..., 1:-1] = arr[..., 2:] - 2.0 * arr[..., 1:-1] + arr[..., :-2]
    out[..., 0] = arr[..., 1] - 2.0 * arr[..., 0]
    out[..., -1] = arr[..., -2] - 2.0 * arr[..., -1]
    return out


def _second_difference_first(arr: np.ndarray) -> np.ndarray:
    out = np.empty_like(arr)
    out[1:-1] = arr[2:] - 2.0 * arr[1:-1] + arr[:-2]
    out[0] = arr[1] - 2.0 * arr[0]
    out[-1] = arr[-2] - 2.0 * arr[-1]
    return out


def check_potential_domain(grid: GridSpec, params: GrwParams) -> None:
    """Reject tabulated potentials that do not cover the working grid."""
    pot = params.potential
    if isinstance(pot, Tabulated):
        slack = 1e-12 * (grid.x_max - grid.x_min)
        if grid.x_min < pot.grid.x_min - slack or grid.x_max > pot.grid.x_max + slack:
            raise ConfigurationError(
                f"tabulated potential covers [{pot.grid.x_min}, {pot.grid.x_max}] "
                f"but the grid spans [{grid.x_min}, {grid.x_max}]")


def apply_hamiltonian(arr: np.ndarray, grid: GridSpec, params: GrwParams,
                      axis: int = -1, v_grid: np.ndarray = None) -> np.ndarray:
    """Apply the discrete H = -(hbar^2/2m) d2/dx2 + V along one axis.

    Works on any array whose given axis has grid length; for density
    matrices axis=0 gives H rho and axis=1 gives rho H (H is real
    symmetric).  The kinetic term is dropped when params.kinetic is
    false.
    """
    arr = np.asarray(arr)
    if arr.shape[axis] != grid.n_points:
        raise DimensionError(
            f"axis {axis} has length {arr.shape[axis]}, grid has {grid.n_points}")
    if v_grid is None:
        check_potential_domain(grid, params)
        v_grid = potential_on_grid(params.potential, grid, params.mass)
    coef = -params.hbar**2 / (2.0 * params.mass * grid.dx**2)
    if axis in (-1, arr.ndim - 1):
        out = coef * _second_difference_last(arr) if params.kinetic \
            else np.zeros_like(arr)
        out += v_grid * arr
        return out
    if axis == 0:
        out = coef * _second_difference_first(arr) if params.kinetic \
            else np.zeros_like(arr)
        v_shape = (grid.n_points,) + (1,) * (arr.ndim - 1)
        out += v_grid.reshape(v_shape) * arr
        return out
    raise DimensionError(f"axis must be 0 or the last axis, got {axis}")


def unitary_generator(field: DensityField, params: GrwParams) -> np.ndarray:
    """-(i/hbar) [H, rho] for the shared finite-difference H."""
    check_potential_domain(field.grid, params)
    v = potential_on_grid(params.potential, field.grid, params.mass)
    h_rho = apply_hamiltonian(field.rho, field.grid, params, axis=0, v_grid=v)
    rho_h = apply_hamiltonian(field.rho, field.grid, params, axis=1, v_grid=v)
    return (-1j / params.hbar) * (h_rho - rho_h)


def dissipator(field: DensityField, params: GrwParams) -> np.ndarray:
    """-Gamma(x, y) rho(x, y), zero on the diagonal."""
    return -damping_matrix(field.grid, params) * field.rho


def stability_bound(grid: GridSpec, params: GrwParams) -> float:
    """Kinetic RK4 step bound 0.4 m dx^2 / hbar.

    This only accounts for the kinetic spectral radius; steep potentials
    or strong damping require smaller steps than the bound allows.
    """
    return 0.4 * params.mass * grid.dx**2 / params.hbar


def _check_dt(grid: GridSpec, params: GrwParams, dt: float) -> None:
    if dt <= 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    if params.kinetic:
        bound = stability_bound(grid, params)
        if dt > bound:
            raise ConfigurationError(
                f"dt = {dt:g} exceeds the kinetic stability bound "
                f"0.4 m dx^2 / hbar = {bound:g}")


class _Workspace:
    """Preallocated buffers and fused coefficients for repeated RK4 steps.

    The right-hand side is evaluated as

        rhs = a (D2_rows - D2_cols) rho + C rho,
        a = i hbar / (2 m dx^2),
        C = -(i/hbar) (V(x_i) - V(x_j)) - Gamma(x_i, x_j),

    which is algebraically -(i/hbar)[H, rho] - Gamma rho but touches
    each matrix only a handful of times and allocates nothing per step.
    """

    def __init__(self, grid: GridSpec, params: GrwParams):
        check_potential_domain(grid, params)
        n = grid.n_points
        v = potential_on_grid(params.potential, grid, params.mass)
        gamma = damping_matrix(grid, params)
        self.kinetic = params.kinetic
        self.coef = 1j * params.hbar / (2.0 * params.mass * grid.dx**2)
        self.cmat = (-1j / params.hbar) * (v[:, None] - v[None, :]) - gamma
        self._k = np.empty((n, n), dtype=complex)
        self._tmp = np.empty((n, n), dtype=complex)
        self._stage = np.empty((n, n), dtype=complex)
        self._acc = np.empty((n, n), dtype=complex)

    def _rhs(self, r, out, tmp):
        if self.kinetic:
            np.subtract(r[2:], r[1:-1], out=out[1:-1])
            out[1:-1] -= r[1:-1]
            out[1:-1] += r[:-2]
            np.subtract(r[1], r[0], out=out[0])
            out[0] -= r[0]
            np.subtract(r[-2], r[-1], out=out[-1])
            out[-1] -= r[-1]
            np.subtract(r[:, 2:], r[:, 1:-1], out=tmp[:, 1:-1])
            tmp[:, 1:-1] -= r[:, 1:-1]
            tmp[:, 1:-1] += r[:, :-2]
            np.subtract(r[:, 1], r[:, 0], out=tmp[:, 0])
            tmp[:, 0] -= r[:, 0]
            np.subtract(r[:, -2], r[:, -1], out=tmp[:, -1])
            tmp[:, -1] -= r[:, -1]
            out -= tmp
            out *= self.coef
            np.multiply(self.cmat, r, out=tmp)
            out += tmp
        else:
            np.multiply(self.cmat, r, out=out)

    def rk4(self, rho, dt):
        """One re-Hermitised RK4 step; returns a fresh array."""
        k, tmp, stage, acc = self._k, self._tmp, self._stage, self._acc
        self._rhs(rho, k, tmp)
        np.multiply(k, dt / 6.0, out=acc)
        acc += rho
        np.multiply(k, 0.5 * dt, out=stage)
        stage += rho
        self._rhs(stage, k, tmp)
        np.multiply(k, dt / 3.0, out=tmp)
        acc += tmp
        np.multiply(k, 0.5 * dt, out=stage)
        stage += rho
        self._rhs(stage, k, tmp)
        np.multiply(k, dt / 3.0, out=tmp)
        acc += tmp
        np.multiply(k, dt, out=stage)
        stage += rho
        self._rhs(stage, k, tmp)
        np.multiply(k, dt / 6.0, out=tmp)
        acc += tmp
        np.conjugate(acc.T, out=tmp)
        acc += tmp
        acc *= 0.5
        return acc.copy()


def step_rk4(field: DensityField, params: GrwParams, dt: float) -> DensityField:
    """One RK4 step of the master equation; result is re-Hermitised."""
    _check_dt(field.grid, params, dt)
    ws = _Workspace(field.grid, params)
    return DensityField(field.grid, ws.rk4(field.rho, dt), field.time + dt)


@dataclass
class DiagnosticsSeries:
    """Scalar diagnostics sampled along an evolve() run."""

    times: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    herm_residue: np.ndarray
    offdiag_mass: np.ndarray
    edge_mass: np.ndarray

    COLUMNS = ("time", "trace", "purity", "herm_residue",
               "offdiag_mass", "edge_mass")

    def as_columns(self) -> np.ndarray:
        return np.column_stack([self.times, self.trace, self.purity,
                                self.herm_residue, self.offdiag_mass,
                                self.edge_mass])


def evolve(field: DensityField, params: GrwParams, t_final: float, dt: float,
           sample_every: int = 25, edge_fraction: float = 0.05,
           edge_limit: float = 1e-6):
    """March the master equation from field.time to t_final.

    Steps are RK4 of size dt with one shorter final step if t_final is
    not a multiple of dt away.  Diagnostics are recorded at the start,
    every sample_every steps, and at the end.  If the outer
    edge_fraction of the diagonal ever carries more than edge_limit of
    the trace, the hard-wall truncation is no longer harmless and
    EdgeMassError is raised.

    Returns (final DensityField, DiagnosticsSeries).
    """
    if t_final < field.time:
        raise ConfigurationError(
            f"t_final = {t_final:g} is before the field time {field.time:g}")
    _check_dt(field.grid, params, dt)
    check_potential_domain(field.grid, params)
    if sample_every < 1:
        raise ConfigurationError(f"sample_every must be >= 1, got {sample_every}")

    grid = field.grid
    ws = _Workspace(grid, params)
    rho = field.rho.copy()
    t = field.time

    samples = {name: [] for name in DiagnosticsSeries.COLUMNS}

    def record(rho_now, t_now):
        f = DensityField(grid, rho_now, t_now)
        tr = f.trace()
        edge = f.edge_mass(edge_fraction)
        samples["time"].append(t_now)
        samples["trace"].append(tr)
        samples["purity"].append(f.purity())
        samples["herm_residue"].append(f.herm_residue())
        samples["offdiag_mass"].append(f.offdiag_mass(params.r_c))
        samples["edge_mass"].append(edge)
        if edge > edge_limit * abs(tr):
            raise EdgeMassError(
                f"edge mass {edge:.3e} exceeds {edge_limit:g} of the trace "
                f"at t = {t_now:g}; widen the grid")

    record(rho, t)
    steps_done = 0
    eps = 1e-12 * max(dt, 1.0)
    remaining = t_final - t
    while remaining > eps:
        step = min(dt, remaining)
        rho = ws.rk4(rho, step)
        t += step
        steps_done += 1
        remaining = t_final - t
        if remaining > eps and steps_done % sample_every == 0:
            record(rho, t)
    if steps_done > 0:
        record(rho, t_final)

    series = DiagnosticsSeries(**{
        "times": np.array(samples["time"]),
        "trace": np.array(samples["trace"]),
        "purity": np.array(samples["purity"]),
        "herm_residue": np.array(samples["herm_residue"]),
        "offdiag_mass": np.array(samples["offdiag_mass"]),
        "edge_mass": np.array(samples["edge_mass"]),
    })
    return DensityField(grid, rho, t_final), series
