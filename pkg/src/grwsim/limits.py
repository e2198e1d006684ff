"""Phase-space views and the quantum / classical limit checks.

The Wigner-style field of a density matrix is

    w(q, p) = (1 / 2 pi hbar) int drho(q + d/2, q - d/2) exp(-i p d / hbar),

computed by sampling the rotated matrix over separation d and Fourier
transforming each row.  When the separation grid sits on even multiples
of the position spacing the rotated samples are exact anti-diagonal
matrix entries; any other separation grid falls back to bilinear
interpolation, which is cheap but dominates the error budget for
narrow coherence structures.

For nearly-diagonal (decohered) states, sufficiently wide that the
collapse noise is negligible, the field obeys the classical Liouville
equation; liouville_reference integrates that by following
characteristics of the Hamiltonian flow backwards with RK4 and pulling
the initial field back through bilinear interpolation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, DimensionError, DomainEscapeError,
                     DomainError, TransformFidelityError)
from .master import DensityField, evolve
from .model import GrwParams, potential_gradient
from .numerics import GridSpec, fourier_row_transform, trapezoid_weights

_EVEN_LATTICE_TOL = 1e-9


@dataclass
class PhaseField:
    """Real phase-space field sampled on a (position, momentum) mesh."""

    q_grid: GridSpec
    p_grid: GridSpec
    values: np.ndarray
    time: float = 0.0
    imag_residue: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        expected = (self.q_grid.n_points, self.p_grid.n_points)
        if vals.shape != expected:
            raise DimensionError(
                f"phase field has shape {vals.shape}, expected {expected}")
        self.values = vals

    def mass(self) -> float:
        """Double trapezoid of the field over the mesh."""
        wq = trapezoid_weights(self.q_grid)
        wp = trapezoid_weights(self.p_grid)
        return float(wq @ self.values @ wp)

    def momentum_marginal(self, q_index: int = None) -> np.ndarray:
        """Integrate over p; full marginal, or one row if q_index given."""
        wp = trapezoid_weights(self.p_grid)
        if q_index is None:
            return self.values @ wp
        return self.values[q_index] @ wp


def aligned_delta_grid(grid: GridSpec, half_span: float) -> GridSpec:
    """Separation grid on even multiples of dx, symmetric about zero.

    Even multiples keep both q + d/2 and q - d/2 on the position grid,
    so the rotation needs no interpolation.
    """
    pitch = 2.0 * grid.dx
    k = int(np.floor(half_span / pitch))
    if k < 4:
        raise ConfigurationError(
            f"half_span {half_span:g} covers fewer than 4 separation "
            f"pitches {pitch:g}")
    return GridSpec(2 * k + 1, -k * pitch, k * pitch)


def _rotate_even_lattice(rho: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Exact anti-diagonal samples rho(q + k dx, q - k dx), zero outside."""
    n = rho.shape[0]
    j = np.arange(n)[:, None]
    k = offsets[None, :]
    i1 = j + k
    i2 = j - k
    valid = (i1 >= 0) & (i1 < n) & (i2 >= 0) & (i2 < n)
    return np.where(valid, rho[np.clip(i1, 0, n - 1), np.clip(i2, 0, n - 1)],
                    0.0)


def _rotate_bilinear(rho: np.ndarray, grid: GridSpec,
                     deltas: np.ndarray) -> np.ndarray:
    """Bilinear samples of rho(q + d/2, q - d/2), zero outside the grid."""
    n = grid.n_points
    q = grid.points()[:, None]
    x = q + 0.5 * deltas[None, :]
    y = q - 0.5 * deltas[None, :]

    def gather_1d_pair(xc, yc):
        fi = (xc - grid.x_min) / grid.dx
        fj = (yc - grid.x_min) / grid.dx
        inside = (fi >= 0) & (fi <= n - 1) & (fj >= 0) & (fj <= n - 1)
        i0 = np.clip(np.floor(fi).astype(int), 0, n - 2)
        j0 = np.clip(np.floor(fj).astype(int), 0, n - 2)
        si = fi - i0
        sj = fj - j0
        vals = (rho[i0, j0] * (1 - si) * (1 - sj)
                + rho[i0 + 1, j0] * si * (1 - sj)
                + rho[i0, j0 + 1] * (1 - si) * sj
                + rho[i0 + 1, j0 + 1] * si * sj)
        return np.where(inside, vals, 0.0)

    return gather_1d_pair(x, y)


def to_phase_space(field: DensityField, p_grid: GridSpec, hbar: float = 1.0,
                   delta_grid: GridSpec = None,
                   max_imag_ratio: float = 1e-4) -> PhaseField:
    """Transform a density matrix to its phase-space field.

    delta_grid defaults to the full even-multiple lattice of the
    position grid (exact rotation).  A custom delta_grid aligned with
    that lattice also uses exact samples; anything else is interpolated
    bilinearly.  A Hermitian input gives a real field; if the imaginary
    part exceeds max_imag_ratio of the real peak the transform refuses
    to silently discard it and raises.
    """
    grid = field.grid
    if delta_grid is None:
        k = (grid.n_points - 1) // 2
        pitch = 2.0 * grid.dx
        delta_grid = GridSpec(2 * k + 1, -k * pitch, k * pitch)
    deltas = delta_grid.points()
    offsets = deltas / (2.0 * grid.dx)
    rounded = np.round(offsets)
    if np.max(np.abs(offsets - rounded)) < _EVEN_LATTICE_TOL:
        rot = _rotate_even_lattice(field.rho, rounded.astype(int))
    else:
        rot = _rotate_bilinear(field.rho, grid, deltas)
    ft = fourier_row_transform(rot, delta_grid, p_grid, hbar) / (2.0 * np.pi * hbar)
    residue = float(np.max(np.abs(ft.imag)))
    peak = float(np.max(np.abs(ft.real)))
    if peak > 0 and residue > max_imag_ratio * peak:
        raise TransformFidelityError(
            f"imaginary residue {residue:.3e} exceeds {max_imag_ratio:g} of "
            f"the real peak {peak:.3e}; input is far from Hermitian")
    return PhaseField(grid, p_grid, ft.real, field.time, residue)


def _flow_backwards(q, p, params, t_span, n_steps):
    """RK4 integration of dq/dt = p/m, dp/dt = -V'(q) backwards in time."""
    dt = -t_span / n_steps

    def deriv(qc, pc):
        return pc / params.mass, -potential_gradient(params.potential, qc,
                                                     params.mass)

    for _ in range(n_steps):
        k1q, k1p = deriv(q, p)
        k2q, k2p = deriv(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p)
        k3q, k3p = deriv(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p)
        k4q, k4p = deriv(q + dt * k3q, p + dt * k3p)
        q = q + (dt / 6.0) * (k1q + 2.0 * (k2q + k3q) + k4q)
        p = p + (dt / 6.0) * (k1p + 2.0 * (k2p + k3p) + k4p)
    return q, p


def _bilinear_scalar_field(values, q_grid, p_grid, q, p):
    nq, npts = values.shape
    fi = (q - q_grid.x_min) / q_grid.dx
    fj = (p - p_grid.x_min) / p_grid.dx
    inside = (fi >= 0) & (fi <= nq - 1) & (fj >= 0) & (fj <= npts - 1)
    i0 = np.clip(np.floor(fi).astype(int), 0, nq - 2)
    j0 = np.clip(np.floor(fj).astype(int), 0, npts - 2)
    si = fi - i0
    sj = fj - j0
    vals = (values[i0, j0] * (1 - si) * (1 - sj)
            + values[i0 + 1, j0] * si * (1 - sj)
            + values[i0, j0 + 1] * (1 - si) * sj
            + values[i0 + 1, j0 + 1] * si * sj)
    return np.where(inside, vals, 0.0), inside


def liouville_reference(initial: PhaseField, params: GrwParams, t_span: float,
                        n_steps: int = 400,
                        escape_tol: float = 1e-4) -> PhaseField:
    """Classical Liouville evolution of a phase-space field.

    Characteristics of H = p^2/2m + V are traced backwards from every
    mesh node with n_steps RK4 steps, and the initial field is pulled
    back by bilinear interpolation.  Characteristics that leave the mesh
    contribute zero; if the resulting loss of mass exceeds escape_tol of
    the initial mass, the mesh is too small for this flow and
    DomainEscapeError is raised.  Bilinear resampling alone wobbles the
    integral at the 1e-5 level on smooth fields, which is why the
    default tolerance is not tighter.
    """
    if t_span < 0:
        raise ConfigurationError(f"t_span must be >= 0, got {t_span}")
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    q_mesh, p_mesh = np.meshgrid(initial.q_grid.points(),
                                 initial.p_grid.points(), indexing="ij")
    q0, p0 = _flow_backwards(q_mesh, p_mesh, params, t_span, n_steps)
    vals, _ = _bilinear_scalar_field(initial.values, initial.q_grid,
                                     initial.p_grid, q0, p0)
    out = PhaseField(initial.q_grid, initial.p_grid, vals,
                     initial.time + t_span, initial.imag_residue)
    mass_in = initial.mass()
    if abs(out.mass() - mass_in) > escape_tol * abs(mass_in):
        raise DomainEscapeError(
            f"characteristics carried {abs(out.mass() - mass_in):.3e} of "
            f"{mass_in:.3e} mass off the mesh over t = {t_span:g}")
    return out


def l1_distance(a: PhaseField, b: PhaseField) -> float:
    """Relative L1 distance, integral |a - b| / integral |a|."""
    if a.values.shape != b.values.shape:
        raise DimensionError("phase fields live on different meshes")
    wq = trapezoid_weights(a.q_grid)
    wp = trapezoid_weights(a.p_grid)
    num = wq @ np.abs(a.values - b.values) @ wp
    den = wq @ np.abs(a.values) @ wp
    if den == 0:
        raise DomainError("reference phase field has zero L1 mass")
    return float(num / den)


def fringe_visibility(pf: PhaseField, midpoint: float,
                      blob_centers: tuple) -> float:
    """Interference contrast of a two-blob state in phase space.

    Peak |field| along the momentum slice at the blob midpoint, divided
    by twice the geometric mean of the peak |field| along the slices at
    the blob centres: the cross block enters the midpoint slice from
    both separations +-d, so a balanced pure superposition peaks at
    twice the geometric mean and the normalised contrast is 1.
    Ensemble damping of the cross terms scales it down by exp(-lam t).
    """
    a1, a2 = blob_centers

    def row(q):
        idx = int(np.round((q - pf.q_grid.x_min) / pf.q_grid.dx))
        if not 0 <= idx < pf.q_grid.n_points:
            raise DomainError(f"slice position {q:g} is outside the mesh")
        return np.abs(pf.values[idx])

    fringe = float(np.max(row(midpoint)))
    blobs = float(np.sqrt(np.max(row(a1)) * np.max(row(a2))))
    if blobs == 0:
        raise DomainError("blob slices carry no mass; wrong centres?")
    return min(fringe / (2.0 * blobs), 1.0)


@dataclass
class CoherenceReport:
    """Coherence decay of a sequence of snapshots vs the flat-rate law."""

    times: np.ndarray
    offdiag_mass: np.ndarray
    visibility: np.ndarray
    predicted_damping: np.ndarray

    COLUMNS = ("time", "offdiag_mass", "visibility", "predicted_damping")

    def as_columns(self) -> np.ndarray:
        return np.column_stack([self.times, self.offdiag_mass,
                                self.visibility, self.predicted_damping])


def coherence_report(snapshots, params: GrwParams, p_grid: GridSpec = None,
                     blob_centers: tuple = None, hbar: float = None,
                     delta_grid: GridSpec = None) -> CoherenceReport:
    """Track coherence across density snapshots.

    Off-diagonal mass (entries further than 3 r_c from the diagonal) is
    always reported; fringe visibility additionally needs p_grid and
    blob_centers to build the phase-space view.  predicted_damping is
    exp(-lam (t - t0)), the saturated flat decay of far coherence.
    """
    snapshots = list(snapshots)
    if len(snapshots) < 2:
        raise DomainError(
            f"need at least 2 snapshots to report decay, got {len(snapshots)}")
    hbar = params.hbar if hbar is None else hbar
    times = np.array([s.time for s in snapshots])
    offdiag = np.array([s.offdiag_mass(params.r_c) for s in snapshots])
    if p_grid is not None and blob_centers is not None:
        mid = 0.5 * (blob_centers[0] + blob_centers[1])
        vis = np.array([
            fringe_visibility(
                to_phase_space(s, p_grid, hbar=hbar, delta_grid=delta_grid),
                mid, blob_centers)
            for s in snapshots])
    else:
        vis = np.full(len(snapshots), np.nan)
    predicted = np.exp(-params.lam * (times - times[0]))
    return CoherenceReport(times, offdiag, vis, predicted)


@dataclass
class QuantumLimitReport:
    """Comparison of a weak-collapse run against the unitary baseline."""

    lam_t: float
    max_abs_difference: float
    reference_peak: float
    relative_deviation: float
    first_order_bound: float
    within_bound: bool


def quantum_limit_check(field: DensityField, params: GrwParams,
                        t_final: float, dt: float,
                        **evolve_kwargs) -> QuantumLimitReport:
    """Evolve with and without collapse and compare.

    Only meaningful deep in the weak-collapse regime, so lam * t must
    not exceed 0.01.  The deviation should be first order,
    |rho_lam - rho_0| <= 2 lam t max|rho_0| within discretisation error.
    """
    import dataclasses

    lam_t = params.lam * (t_final - field.time)
    if lam_t > 0.01 + 1e-12:
        raise ConfigurationError(
            f"lam * t = {lam_t:g} is not a quantum-limit regime (max 0.01)")
    with_collapse, _ = evolve(field, params, t_final, dt, **evolve_kwargs)
    unitary_params = dataclasses.replace(params, lam=0.0)
    baseline, _ = evolve(field, unitary_params, t_final, dt, **evolve_kwargs)
    diff = float(np.max(np.abs(with_collapse.rho - baseline.rho)))
    peak = float(np.max(np.abs(baseline.rho)))
    bound = 2.0 * lam_t * peak
    return QuantumLimitReport(
        lam_t=lam_t, max_abs_difference=diff, reference_peak=peak,
        relative_deviation=diff / peak if peak > 0 else np.inf,
        first_order_bound=bound, within_bound=diff <= bound)
