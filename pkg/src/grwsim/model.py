"""Physical parameters of the 1-D spontaneous-localisation model.

Between jumps the particle evolves under H = p^2/2m + V(x).  Jumps
arrive as a Poisson process with rate lam and multiply the wave function
by the normalised Gaussian kernel

    l(x, r) = (pi r_c^2)^(-1/4) exp(-(x - r)^2 / (2 r_c^2)),

whose square integrates to one over the jump centre r.  Two closed forms
derived from the kernel drive every solver in this package:

    overlap(x, y) = int l(x, r) l(y, r) dr = exp(-(x - y)^2 / (4 r_c^2))
    damping(x, y) = lam * (1 - overlap(x, y))

so ensemble-averaged coherence between x and y decays at rate
damping(x, y), saturating at lam for |x - y| >> r_c.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError
from .numerics import GridSpec


@dataclass(frozen=True)
class Free:
    """V(x) = 0."""


@dataclass(frozen=True)
class Harmonic:
    """V(x) = m omega^2 x^2 / 2."""

    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """V sampled on its own grid; evaluated by linear interpolation.

    Evaluation outside the tabulated range is a DomainError rather than
    an extrapolation.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise DimensionError(
                f"table has {vals.shape} values for a "
                f"{self.grid.n_points}-point grid")
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("tabulated potential contains non-finite values")
        object.__setattr__(self, "values", vals)


def potential_value(potential, x, mass: float):
    """Evaluate V at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if isinstance(potential, Free):
        return np.zeros_like(x)
    if isinstance(potential, Harmonic):
        return 0.5 * mass * potential.omega**2 * x**2
    if isinstance(potential, Tabulated):
        lo, hi = potential.grid.x_min, potential.grid.x_max
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError(
                f"potential evaluated outside tabulated range [{lo}, {hi}]")
        return np.interp(x, potential.grid.points(), potential.values)
    raise ConfigurationError(f"unknown potential type {type(potential).__name__}")


def potential_gradient(potential, x, mass: float):
    """Evaluate dV/dx at x; tabulated potentials use a central-difference table."""
    x = np.asarray(x, dtype=float)
    if isinstance(potential, Free):
        return np.zeros_like(x)
    if isinstance(potential, Harmonic):
        return mass * potential.omega**2 * x
    if isinstance(potential, Tabulated):
        lo, hi = potential.grid.x_min, potential.grid.x_max
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError(
                f"potential gradient evaluated outside tabulated range [{lo}, {hi}]")
        slopes = np.gradient(potential.values, potential.grid.dx)
        return np.interp(x, potential.grid.points(), slopes)
    raise ConfigurationError(f"unknown potential type {type(potential).__name__}")


@dataclass(frozen=True)
class GrwParams:
    """Model parameters for one run.

    ``kinetic=False`` drops the p^2/2m term while keeping V and the
    collapse terms; this is the frozen-kinetics regime in which the
    master equation decouples into independent scalar decays.
    """

    lam: float
    r_c: float
    mass: float
    hbar: float = 1.0
    potential: object = field(default_factory=Free)
    kinetic: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"collapse rate must be >= 0, got {self.lam}")
        if self.r_c <= 0:
            raise ConfigurationError(f"collapse width must be > 0, got {self.r_c}")
        if self.mass <= 0:
            raise ConfigurationError(f"mass must be > 0, got {self.mass}")
        if self.hbar <= 0:
            raise ConfigurationError(f"hbar must be > 0, got {self.hbar}")


@dataclass(frozen=True)
class CollapseKernel:
    """Gaussian localisation kernel of width r_c."""

    r_c: float

    def __post_init__(self):
        if self.r_c <= 0:
            raise ConfigurationError(f"collapse width must be > 0, got {self.r_c}")

    @property
    def normalization(self) -> float:
        """(pi r_c^2)^(-1/4), which makes int l^2 dr = 1."""
        return (np.pi * self.r_c**2) ** (-0.25)

    @classmethod
    def from_params(cls, params: GrwParams) -> "CollapseKernel":
        return cls(params.r_c)


def collapse_kernel_value(kernel: CollapseKernel, x, r):
    """l(x, r), vectorised over x and r."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    return kernel.normalization * np.exp(-((x - r) ** 2) / (2.0 * kernel.r_c**2))


def gaussian_overlap(r_c: float, x, y):
    """int l(x, r) l(y, r) dr = exp(-(x - y)^2 / (4 r_c^2))."""
    if r_c <= 0:
        raise ConfigurationError(f"collapse width must be > 0, got {r_c}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-((x - y) ** 2) / (4.0 * r_c**2))


def damping_rate(params: GrwParams, x, y):
    """Coherence decay rate lam * (1 - overlap(x, y))."""
    return params.lam * (1.0 - gaussian_overlap(params.r_c, x, y))


def overlap_matrix(grid: GridSpec, r_c: float) -> np.ndarray:
    """overlap(x_i, x_j) on the full grid mesh."""
    pts = grid.points()
    return gaussian_overlap(r_c, pts[:, None], pts[None, :])


def damping_matrix(grid: GridSpec, params: GrwParams) -> np.ndarray:
    """damping_rate(x_i, x_j) on the full grid mesh."""
    return params.lam * (1.0 - overlap_matrix(grid, params.r_c))


def potential_on_grid(potential, grid: GridSpec, mass: float) -> np.ndarray:
    """V sampled on the grid points."""
    return potential_value(potential, grid.points(), mass)
