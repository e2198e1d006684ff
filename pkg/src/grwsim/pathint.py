"""Short-time propagator composition with interleaved collapse factors.

One step of length eps propagates both indices of the density matrix
with a discretisation of the short-time Fresnel kernel

    K(x, x') = sqrt(m / (2 pi i hbar eps))
               * exp[(i/hbar) (m (x - x')^2 / (2 eps)
                               - eps V((x + x')/2))] dx',

i.e. rho -> K rho K^dag, and then multiplies entrywise by the collapse
factor (1 - lam eps) + lam eps overlap(x, y): with probability lam eps
a localisation jump occurred during the slice, which in the ensemble
average multiplies coherence by the Gaussian overlap.  Composing n
factors reproduces exp(-lam T (1 - overlap)) to first order in eps.

Sampling the quadratic phase directly on an open grid does not give a
usable matrix: only hops inside the first Fresnel zone interfere
constructively, and the rapidly rotating phase beyond it must cancel.
On a truncated grid that cancellation fails (the partial chirp sums
alias), leaving a matrix whose largest singular values are far above 1;
repeated application then amplifies round-off exponentially.  The
kinetic kernel is therefore built in its regulated form: the exactly
unitary circulant with Fourier symbol exp(-i hbar eps k^2 / (2 m)),
which is the same chirp summed over periodic images.  Row sums are
exactly 1, composition is exact (K_eps^2 equals K_{2 eps}), and the
midpoint potential phase is applied entrywise on top.

The grid must still resolve the chirp: neighbouring points contribute
phase m dx^2 / (2 hbar eps), which has to stay below pi; build_kernel()
enforces that, so eps cannot be made arbitrarily small at fixed dx.

With kinetic transport switched off the kernel degenerates to the pure
potential phase diag(exp(-i eps V(x) / hbar)), the infinite-mass limit.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import circulant

from .errors import ConfigurationError, DimensionError
from .master import DensityField, check_potential_domain
from .model import Free, GrwParams, overlap_matrix, potential_value
from .numerics import GridSpec, hermitize


@dataclass
class ShortTimeKernel:
    """Discretised one-step propagator K for a fixed slice length eps."""

    grid: GridSpec
    epsilon: float
    k_matrix: np.ndarray


@dataclass
class CollapseFactor:
    """Entrywise coherence factor (1 - lam eps) + lam eps overlap."""

    grid: GridSpec
    epsilon: float
    lam: float
    r_c: float
    factor: np.ndarray


def min_epsilon(grid: GridSpec, params: GrwParams) -> float:
    """Smallest slice the grid can resolve, m dx^2 / (2 pi hbar)."""
    return params.mass * grid.dx**2 / (2.0 * np.pi * params.hbar)


def build_kernel(grid: GridSpec, params: GrwParams,
                 epsilon: float) -> ShortTimeKernel:
    """Build the one-slice kernel; rejects slices too short for the grid."""
    if epsilon <= 0:
        raise ConfigurationError(f"slice length must be positive, got {epsilon}")
    check_potential_domain(grid, params)
    pts = grid.points()
    if params.kinetic:
        eps_min = min_epsilon(grid, params)
        if epsilon < eps_min:
            raise ConfigurationError(
                f"slice eps = {epsilon:g} is below the grid sampling bound "
                f"m dx^2 / (2 pi hbar) = {eps_min:g}; neighbouring-point "
                f"phase would exceed pi")
        wavenumbers = 2.0 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx)
        symbol = np.exp(-0.5j * params.hbar * epsilon
                        * wavenumbers**2 / params.mass)
        k = circulant(np.fft.ifft(symbol))
        if not isinstance(params.potential, Free):
            v_mid = potential_value(
                params.potential, 0.5 * (pts[:, None] + pts[None, :]),
                params.mass)
            k = k * np.exp(-1j * epsilon * v_mid / params.hbar)
    else:
        v = potential_value(params.potential, pts, params.mass)
        k = np.diag(np.exp(-1j * epsilon * v / params.hbar))
    return ShortTimeKernel(grid, epsilon, k)


def build_collapse_factor(grid: GridSpec, params: GrwParams,
                          epsilon: float) -> CollapseFactor:
    if epsilon <= 0:
        raise ConfigurationError(f"slice length must be positive, got {epsilon}")
    if params.lam * epsilon >= 1.0:
        raise ConfigurationError(
            f"lam * eps = {params.lam * epsilon:g} >= 1; the one-jump "
            f"approximation is meaningless at this slice length")
    factor = (1.0 - params.lam * epsilon) \
        + params.lam * epsilon * overlap_matrix(grid, params.r_c)
    return CollapseFactor(grid, epsilon, params.lam, params.r_c, factor)


def step_density(field: DensityField, kernel: ShortTimeKernel,
                 factor: CollapseFactor) -> DensityField:
    """One slice: rho -> (K rho K^dag) * factor."""
    if kernel.grid != field.grid or factor.grid != field.grid:
        raise DimensionError("kernel, factor, and field grids differ")
    if abs(kernel.epsilon - factor.epsilon) > 1e-15 * max(kernel.epsilon, 1.0):
        raise DimensionError(
            f"kernel slice {kernel.epsilon:g} and collapse slice "
            f"{factor.epsilon:g} differ")
    rho = kernel.k_matrix @ field.rho @ kernel.k_matrix.conj().T
    rho *= factor.factor
    return DensityField(field.grid, rho, field.time + kernel.epsilon)


@dataclass
class PathIntegralResult:
    """Final field plus the running collapse product at tracked probes."""

    field: DensityField
    probe_points: tuple
    probe_products: np.ndarray


def propagate(field: DensityField, params: GrwParams, t_final: float,
              n_steps: int, probes: tuple = ()) -> PathIntegralResult:
    """Compose n_steps equal slices from field.time to t_final.

    The collapse factor is first-order in eps, so lam * eps must be
    small; anything above 0.1 is refused.  probes is an optional tuple
    of index pairs (i, j); for each, the running product of collapse
    factors is recorded after every slice (n_steps + 1 values including
    the initial 1), which exposes the exp(-lam T (1 - overlap)) decay
    without the kinetic part.  The final density is re-Hermitised.
    """
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    if t_final <= field.time:
        raise ConfigurationError(
            f"t_final = {t_final:g} is not after the field time {field.time:g}")
    epsilon = (t_final - field.time) / n_steps
    if params.lam * epsilon > 0.1:
        raise ConfigurationError(
            f"lam * eps = {params.lam * epsilon:g} > 0.1; increase n_steps")
    kernel = build_kernel(field.grid, params, epsilon)
    factor = build_collapse_factor(field.grid, params, epsilon)

    probes = tuple(probes)
    n = field.grid.n_points
    for i, j in probes:
        if not (0 <= i < n and 0 <= j < n):
            raise DimensionError(f"probe ({i}, {j}) outside a {n}-point grid")
    products = np.ones((len(probes), n_steps + 1))
    probe_factors = np.array([factor.factor[i, j] for i, j in probes])

    current = field
    for k in range(n_steps):
        current = step_density(current, kernel, factor)
        if probes:
            products[:, k + 1] = products[:, k] * probe_factors
    final = DensityField(current.grid, hermitize(current.rho), current.time)
    return PathIntegralResult(final, probes, products)
