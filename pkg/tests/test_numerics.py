import numpy as np
import pytest

from grwsim.errors import ConfigurationError, DimensionError
from grwsim.numerics import (GridSpec, fourier_row_transform, herm_residue,
                             hermitize, trapezoid_integrate,
                             trapezoid_weights)


def test_grid_spacing_and_points():
    g = GridSpec(9, -2.0, 2.0)
    assert g.dx == pytest.approx(0.5)
    pts = g.points()
    assert pts[0] == -2.0
    assert pts[-1] == pytest.approx(2.0)
    assert len(pts) == 9


def test_grid_rejects_too_few_points():
    with pytest.raises(ConfigurationError):
        GridSpec(7, 0.0, 1.0)


def test_grid_rejects_empty_range():
    with pytest.raises(ConfigurationError):
        GridSpec(16, 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        GridSpec(16, 2.0, -2.0)


def test_trapezoid_weights_sum_to_span():
    g = GridSpec(33, -3.0, 5.0)
    assert trapezoid_weights(g).sum() == pytest.approx(8.0)


def test_trapezoid_matches_gaussian_closed_form():
    # int exp(-x^2) dx = sqrt(pi); the domain is wide enough that the
    # truncated tail is far below the quadrature error.
    g = GridSpec(4096, -12.0, 12.0)
    vals = np.exp(-g.points() ** 2)
    assert trapezoid_integrate(vals, g) == pytest.approx(np.sqrt(np.pi),
                                                         abs=1e-10)


def test_trapezoid_broadcasts_over_leading_axes():
    g = GridSpec(64, 0.0, 1.0)
    stack = np.ones((3, 64))
    out = trapezoid_integrate(stack, g)
    np.testing.assert_allclose(out, np.ones(3))


def test_trapezoid_rejects_wrong_length():
    g = GridSpec(64, 0.0, 1.0)
    with pytest.raises(DimensionError):
        trapezoid_integrate(np.ones(63), g)


def test_hermitize_projects_and_fixes():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = hermitize(m)
    assert herm_residue(h) < 1e-15
    np.testing.assert_allclose(hermitize(h), h)


def test_hermitize_rejects_non_square():
    with pytest.raises(DimensionError):
        hermitize(np.ones((3, 4)))


def test_herm_residue_reads_off_the_asymmetry():
    m = np.array([[1.0, 2.0], [2.0 + 1.0j, 3.0]])
    # M - M^dag has +-1j in the off-diagonal corners
    assert herm_residue(m) == pytest.approx(1.0)


def test_fourier_row_transform_gaussian_oracle():
    # row exp(-d^2 / 2 sigma^2) transforms to
    # sigma sqrt(2 pi) exp(-p^2 sigma^2 / 2)
    sigma = 0.7
    dg = GridSpec(801, -10.0, 10.0)
    pg = GridSpec(41, -4.0, 4.0)
    row = np.exp(-dg.points() ** 2 / (2.0 * sigma**2))
    out = fourier_row_transform(row, dg, pg)
    expect = sigma * np.sqrt(2.0 * np.pi) * np.exp(
        -pg.points() ** 2 * sigma**2 / 2.0)
    np.testing.assert_allclose(out[0].real, expect, atol=1e-10)
    np.testing.assert_allclose(out[0].imag, np.zeros_like(expect), atol=1e-12)


def test_fourier_row_transform_hbar_rescales_momentum():
    dg = GridSpec(801, -10.0, 10.0)
    pg = GridSpec(21, -2.0, 2.0)
    pg_scaled = GridSpec(21, -4.0, 4.0)
    row = np.exp(-dg.points() ** 2)
    a = fourier_row_transform(row, dg, pg, hbar=1.0)
    b = fourier_row_transform(row, dg, pg_scaled, hbar=2.0)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_fourier_row_transform_rejects_mismatch():
    dg = GridSpec(16, -1.0, 1.0)
    pg = GridSpec(8, -1.0, 1.0)
    with pytest.raises(DimensionError):
        fourier_row_transform(np.ones((2, 15)), dg, pg)
