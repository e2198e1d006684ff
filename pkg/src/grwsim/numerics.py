"""Grid, quadrature, and transform primitives shared by every solver.

All state lives on a uniform 1-D position grid.  A density matrix is a
plain complex ndarray indexed as ``rho[i, j] == rho(x_i, x_j)``; traces
and norms are trapezoid quadratures over that grid.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n_points`` samples spanning ``[x_min, x_max]``.

    Both endpoints are grid points; the spacing is
    ``(x_max - x_min) / (n_points - 1)``.
    """

    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        if self.n_points < 8:
            raise ConfigurationError(
                f"grid needs at least 8 points, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ConfigurationError(
                f"grid range is empty: [{self.x_min}, {self.x_max}]")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_points) * self.dx


def trapezoid_weights(grid: GridSpec) -> np.ndarray:
    """Quadrature weights: dx everywhere, dx/2 at the two endpoints."""
    w = np.full(grid.n_points, grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def trapezoid_integrate(values: np.ndarray, grid: GridSpec):
    """Trapezoid quadrature of sampled values over the grid."""
    values = np.asarray(values)
    if values.shape[-1] != grid.n_points:
        raise DimensionError(
            f"got {values.shape[-1]} samples for a {grid.n_points}-point grid")
    return values @ trapezoid_weights(grid)


def hermitize(mat: np.ndarray) -> np.ndarray:
    """Project a square matrix onto its Hermitian part, (M + M^dag)/2."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
    return 0.5 * (mat + mat.conj().T)


def herm_residue(mat: np.ndarray) -> float:
    """Largest entrywise deviation from Hermiticity, max |M - M^dag|."""
    return float(np.max(np.abs(mat - mat.conj().T)))


def fourier_row_transform(field: np.ndarray, delta_grid: GridSpec,
                          p_grid: GridSpec, hbar: float = 1.0) -> np.ndarray:
    """Trapezoid Fourier transform of each row from delta to momentum.

    Returns ``out[i, k] = sum_j w_j field[i, j] exp(-i p_k delta_j / hbar)``
    with trapezoid weights w.  No prefactor is applied; callers supply
    their own normalisation.
    """
    field = np.atleast_2d(np.asarray(field))
    if field.shape[1] != delta_grid.n_points:
        raise DimensionError(
            f"field rows have {field.shape[1]} samples, "
            f"delta grid has {delta_grid.n_points}")
    phases = np.exp(-1j * np.outer(delta_grid.points(), p_grid.points()) / hbar)
    return field @ (trapezoid_weights(delta_grid)[:, None] * phases)
