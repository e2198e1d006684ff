"""Ready-made initial states and named benchmark scenarios.

Every preset bundles a grid, model parameters, an initial-state builder,
and solver step sizes that have been checked against the stability and
sampling bounds of the solvers they are meant for.
"""

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DimensionError, ValidationError
from .master import DensityField
from .model import Free, GrwParams, Harmonic
from .numerics import GridSpec, hermitize, trapezoid_integrate
from .unravel import WaveField


def gaussian_wave(grid: GridSpec, center: float, width: float,
                  momentum: float = 0.0, hbar: float = 1.0) -> WaveField:
    """Normalised Gaussian wave packet; width is the position std dev."""
    if width <= 0:
        raise ConfigurationError(f"width must be positive, got {width}")
    x = grid.points()
    psi = np.exp(-((x - center) ** 2) / (4.0 * width**2)
                 + 1j * momentum * x / hbar)
    nrm = np.sqrt(trapezoid_integrate(np.abs(psi) ** 2, grid))
    return WaveField(grid, psi / nrm)


def gaussian_packet(grid: GridSpec, center: float, width: float,
                    momentum: float = 0.0, hbar: float = 1.0) -> DensityField:
    """Pure-state density of a Gaussian packet, trace normalised to 1."""
    wave = gaussian_wave(grid, center, width, momentum, hbar)
    return wave.density()


def two_gaussian_superposition(grid: GridSpec, a1: float, a2: float, r: float,
                               weights: np.ndarray = None) -> DensityField:
    """Two-site coherence block, rho = sum_ij A_ij g_i(x) g_j(y).

    g_i(x) = exp(-(x - a_i)^2 / r^2).  weights is the 2 x 2 coefficient
    matrix A (default: the balanced pure superposition, all entries
    1/4); it must be Hermitian with non-negative eigenvalues or the
    result is not a physical state.  The returned density is trace
    normalised.
    """
    if r <= 0:
        raise ConfigurationError(f"packet scale r must be positive, got {r}")
    if weights is None:
        weights = np.full((2, 2), 0.25)
    a = np.asarray(weights, dtype=complex)
    if a.shape != (2, 2):
        raise DimensionError(f"weights must be 2 x 2, got {a.shape}")
    if np.max(np.abs(a - a.conj().T)) > 1e-12 * max(np.max(np.abs(a)), 1e-300):
        raise ValidationError("weight matrix is not Hermitian")
    eigs = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    if eigs[0] < -1e-8 * max(eigs[-1], 1e-300):
        raise ValidationError(
            f"weight matrix has negative eigenvalue {eigs[0]:.3e}; "
            f"the state would not be positive")
    x = grid.points()
    g = np.stack([np.exp(-((x - a1) ** 2) / r**2),
                  np.exp(-((x - a2) ** 2) / r**2)])
    rho = np.einsum("ij,ix,jy->xy", a, g, g.conj())
    field = DensityField(grid, hermitize(rho))
    tr = field.trace()
    if tr <= 0:
        raise ValidationError(f"superposition has non-positive trace {tr:g}")
    field.rho /= tr
    return field


def mixed_gaussian_blobs(grid: GridSpec, centers, sigma_q: float,
                         sigma_p: float, weights=None,
                         hbar: float = 1.0) -> DensityField:
    """Statistical mixture of Gaussian blobs with chosen phase-space widths.

    Each blob contributes exp(-(qbar - c)^2 / (2 sigma_q^2)) *
    exp(-d^2 / (2 sigma_d^2)) in midpoint / separation coordinates,
    with coherence length sigma_d = hbar / sigma_p.  Valid states need
    sigma_q sigma_p >= hbar / 2; below that the matrix is not positive.
    The mixture is trace normalised with the given weights.
    """
    if sigma_q <= 0 or sigma_p <= 0:
        raise ConfigurationError("blob widths must be positive")
    if sigma_q * sigma_p < 0.5 * hbar * (1 - 1e-12):
        raise ValidationError(
            f"sigma_q sigma_p = {sigma_q * sigma_p:g} < hbar/2 = "
            f"{0.5 * hbar:g}; no positive state has these widths")
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    if weights is None:
        weights = np.ones(len(centers))
    weights = np.asarray(weights, dtype=float)
    if weights.shape != centers.shape:
        raise DimensionError("weights and centers must have the same length")
    if np.any(weights < 0) or weights.sum() <= 0:
        raise ValidationError("mixture weights must be non-negative, not all zero")
    sigma_d = hbar / sigma_p
    x = grid.points()
    qbar = 0.5 * (x[:, None] + x[None, :])
    delta = x[:, None] - x[None, :]
    rho = np.zeros((grid.n_points, grid.n_points))
    for c, w in zip(centers, weights):
        blob = np.exp(-((qbar - c) ** 2) / (2.0 * sigma_q**2)
                      - delta**2 / (2.0 * sigma_d**2))
        norm = trapezoid_integrate(np.diagonal(blob).copy(), grid)
        rho += (w / norm) * blob
    field = DensityField(grid, rho.astype(complex))
    field.rho /= field.trace()
    return field


@dataclass(frozen=True)
class Scenario:
    """A named, self-consistent benchmark configuration."""

    name: str
    grid: GridSpec
    params: GrwParams
    build_initial: Callable[[GridSpec], DensityField]
    t_final: float
    dt: float
    description: str = ""

    def initial(self) -> DensityField:
        return self.build_initial(self.grid)


def with_grid(scenario: Scenario, grid: GridSpec) -> Scenario:
    """Same scenario rebuilt on a different grid."""
    return dataclasses.replace(scenario, grid=grid)


def _free_quantum_limit() -> Scenario:
    return Scenario(
        name="free-quantum-limit",
        grid=GridSpec(128, -8.0, 8.0),
        params=GrwParams(lam=0.01, r_c=1.0, mass=1.0),
        build_initial=lambda g: gaussian_packet(g, 0.0, 1.0),
        t_final=1.0,
        dt=0.002,
        description=("Free packet with collapse so weak (lam t = 0.01) that "
                     "the run must track the unitary one to first order."))


def _harmonic_oracle() -> Scenario:
    return Scenario(
        name="harmonic-oracle",
        grid=GridSpec(32, -6.0, 6.0),
        params=GrwParams(lam=0.5, r_c=1.0, mass=1.0,
                         potential=Harmonic(omega=1.0)),
        build_initial=lambda g: gaussian_packet(g, 1.0, np.sqrt(0.5)),
        t_final=1.0,
        dt=2.5e-4,
        description=("Displaced harmonic coherent state on a grid small "
                     "enough for the dense superoperator exponential."))


def _pure_decoherence() -> Scenario:
    return Scenario(
        name="pure-decoherence",
        grid=GridSpec(256, -10.0, 10.0),
        params=GrwParams(lam=1.0, r_c=1.0, mass=1.0, kinetic=False),
        build_initial=lambda g: gaussian_packet(g, 0.0, 1.5),
        t_final=3.0,
        dt=0.005,
        description=("Frozen kinetics: every matrix entry decays "
                     "independently as exp(-lam t (1 - overlap)), giving an "
                     "exact analytic target."))


def _two_gaussian_classical() -> Scenario:
    return Scenario(
        name="two-gaussian-classical",
        grid=GridSpec(1200, -7.2, 7.2),
        params=GrwParams(lam=50.0, r_c=1.0, mass=1.0),
        build_initial=lambda g: two_gaussian_superposition(g, 5.0, -5.0, 0.30),
        t_final=0.06,
        dt=5e-5,
        description=("Macroscopic superposition, sites 10 r_c apart, run to "
                     "lam t = 3 so cross coherence is crushed by e^-6 while "
                     "the populations stay put."))


_PRESETS = {
    "free-quantum-limit": _free_quantum_limit,
    "harmonic-oracle": _harmonic_oracle,
    "pure-decoherence": _pure_decoherence,
    "two-gaussian-classical": _two_gaussian_classical,
}


def preset_names() -> tuple:
    return tuple(sorted(_PRESETS))


def preset(name: str) -> Scenario:
    """Look up a named benchmark scenario."""
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset '{name}'; available: "
            f"{', '.join(preset_names())}") from None
    return builder()


def harmonic_classical_scenario() -> Scenario:
    """Classical-limit benchmark: a decohered blob mixture in a stiff trap.

    Not a preset because it is defined by its phase-space initial state;
    the collapse is strong (lam t = 10) and wide (r_c = 3) so residual
    momentum diffusion stays small against the thermal-scale momentum
    spread, and the phase-space field should just rotate classically.
    """
    t_final = np.pi / 20.0
    return Scenario(
        name="harmonic-classical",
        grid=GridSpec(800, -6.0, 6.0),
        params=GrwParams(lam=10.0 / t_final, r_c=3.0, mass=1.0,
                         potential=Harmonic(omega=10.0)),
        build_initial=lambda g: mixed_gaussian_blobs(
            g, centers=(-1.5, 1.5), sigma_q=0.6, sigma_p=6.0),
        t_final=t_final,
        dt=8e-5,
        description=("Two incoherent blobs a quarter period from swapping "
                     "sides; the phase-space field must follow the "
                     "classical rotation."))
