"""Vectorised superoperator oracle: construction, exponentials, guards."""

import numpy as np
import pytest
from scipy.linalg import expm

from grwsim.errors import ConfigurationError, DimensionError
from grwsim.master import DensityField, dissipator, evolve, unitary_generator
from grwsim.model import GrwParams, Harmonic, gaussian_overlap
from grwsim.numerics import GridSpec
from grwsim.scenarios import gaussian_packet
from grwsim.superop import (GRID_CAP, EffectiveHamiltonian, VectorizedState,
                            build_effective_hamiltonian, devectorize,
                            evolve_exponential, hamiltonian_matrix,
                            segment_propagator, vectorize)


def test_effective_hamiltonian_matches_index_loops():
    # assemble the doubled-basis generator entry by entry, straight from
    # its definition, and compare against the kron construction
    grid = GridSpec(8, -3.0, 3.0)
    params = GrwParams(lam=0.8, r_c=0.9, mass=1.1, hbar=0.6,
                       potential=Harmonic(1.4))
    built = build_effective_hamiltonian(grid, params).matrix

    n = grid.n_points
    h = hamiltonian_matrix(grid, params)
    pts = grid.points()
    want = np.zeros((n * n, n * n), dtype=complex)
    for m in range(n):
        for k in range(n):
            row = m * n + k
            for mp in range(n):
                for kp in range(n):
                    col = mp * n + kp
                    val = 0.0 + 0.0j
                    if k == kp:
                        val += h[m, mp]
                    if m == mp:
                        val -= h[kp, k]
                    if m == mp and k == kp:
                        overlap = gaussian_overlap(params.r_c, pts[m], pts[k])
                        val -= 1j * params.hbar * params.lam * (1.0 - overlap)
                    want[row, col] = val
    assert np.max(np.abs(built - want)) < 1e-14


def test_generator_agrees_with_master_right_hand_side():
    grid = GridSpec(12, -4.0, 4.0)
    params = GrwParams(lam=0.6, r_c=1.0, mass=1.0, potential=Harmonic(1.0))
    field = gaussian_packet(grid, 0.8, 0.7)
    h_eff = build_effective_hamiltonian(grid, params)

    vec_rhs = (-1j / params.hbar) * (h_eff.matrix @ vectorize(field).psi)
    mat_rhs = unitary_generator(field, params) + dissipator(field, params)
    want = (mat_rhs * grid.dx).ravel()
    scale = np.max(np.abs(want))
    assert np.max(np.abs(vec_rhs - want)) < 1e-13 * scale


def test_zero_collapse_reduces_to_unitary_sandwich():
    grid = GridSpec(16, -5.0, 5.0)
    params = GrwParams(lam=0.0, r_c=1.0, mass=1.0, potential=Harmonic(1.3))
    field = gaussian_packet(grid, 1.0, 0.8)
    t_final = 0.9

    h_eff = build_effective_hamiltonian(grid, params)
    out = devectorize(evolve_exponential(vectorize(field), h_eff, t_final))

    u = expm(-1j * t_final * hamiltonian_matrix(grid, params) / params.hbar)
    sandwich = u @ field.rho @ u.conj().T
    assert np.max(np.abs(out.rho - sandwich)) < 1e-12 * np.max(np.abs(sandwich))
    # and the collapse term really is absent from the generator
    kron_part = np.kron(hamiltonian_matrix(grid, params), np.eye(16)) \
        - np.kron(np.eye(16), hamiltonian_matrix(grid, params).T)
    assert np.max(np.abs(h_eff.matrix - kron_part)) == 0.0


def test_pure_decoherence_is_exact_elementwise_decay():
    grid = GridSpec(24, -6.0, 6.0)
    params = GrwParams(lam=1.0, r_c=1.0, mass=1.0, kinetic=False)
    field = gaussian_packet(grid, 0.0, 1.0)
    t_final = 3.0
    h_eff = build_effective_hamiltonian(grid, params)
    out = devectorize(evolve_exponential(vectorize(field), h_eff, t_final))

    pts = grid.points()
    gam = 1.0 - np.exp(-(pts[:, None] - pts[None, :]) ** 2 / 4.0)
    mask = np.abs(field.rho) > 1e-12
    ratio_err = np.max(np.abs(out.rho[mask] / field.rho[mask]
                              - np.exp(-t_final * gam)[mask]))
    assert ratio_err < 1e-10


def test_exponential_matches_rk4_master_on_small_harmonic():
    grid = GridSpec(24, -5.0, 5.0)
    params = GrwParams(lam=0.5, r_c=1.0, mass=1.0, potential=Harmonic(1.2))
    field = gaussian_packet(grid, 0.5, 0.8)
    t_final = 0.4

    h_eff = build_effective_hamiltonian(grid, params)
    dense = devectorize(evolve_exponential(vectorize(field), h_eff, t_final))
    stepped, _ = evolve(field, params, t_final, 2e-3)
    assert np.max(np.abs(dense.rho - stepped.rho)) < 1e-9


def test_trace_is_transported_exactly():
    grid = GridSpec(16, -5.0, 5.0)
    params = GrwParams(lam=0.7, r_c=1.0, mass=1.0, potential=Harmonic(1.0))
    state = vectorize(gaussian_packet(grid, 0.0, 0.7))
    h_eff = build_effective_hamiltonian(grid, params)
    out = evolve_exponential(state, h_eff, 1.1)
    diag_idx = np.arange(16) * 17
    assert np.sum(np.real(out.psi[diag_idx])) == pytest.approx(
        np.sum(np.real(state.psi[diag_idx])), abs=1e-12)


def test_segment_propagators_compose():
    grid = GridSpec(12, -4.0, 4.0)
    params = GrwParams(lam=0.5, r_c=1.0, mass=1.0, potential=Harmonic(1.0))
    h_eff = build_effective_hamiltonian(grid, params)
    u_a = segment_propagator(h_eff, 0.2)
    u_b = segment_propagator(h_eff, 0.3)
    u_ab = segment_propagator(h_eff, 0.5)
    assert np.max(np.abs(u_b @ u_a - u_ab)) < 1e-12 * np.max(np.abs(u_ab))


def test_vectorize_round_trip():
    grid = GridSpec(16, -5.0, 5.0)
    field = gaussian_packet(grid, 0.3, 0.6)
    back = devectorize(vectorize(field))
    assert np.max(np.abs(back.rho - field.rho)) < 1e-15 * np.max(
        np.abs(field.rho))
    assert back.time == field.time


def test_grid_cap_refused_before_allocation():
    grid = GridSpec(GRID_CAP + 1, -5.0, 5.0)
    params = GrwParams(lam=0.5, r_c=1.0, mass=1.0)
    with pytest.raises(ConfigurationError):
        build_effective_hamiltonian(grid, params)
    with pytest.raises(ConfigurationError):
        build_effective_hamiltonian(GridSpec(12, -5.0, 5.0), params, cap=8)


def test_shape_and_time_guards():
    grid = GridSpec(12, -4.0, 4.0)
    params = GrwParams(lam=0.5, r_c=1.0, mass=1.0)
    h_eff = build_effective_hamiltonian(grid, params)
    with pytest.raises(DimensionError):
        VectorizedState(grid, np.zeros(12 * 12 - 1, dtype=complex))
    with pytest.raises(DimensionError):
        EffectiveHamiltonian(grid, np.zeros((12, 12), dtype=complex), 1.0)
    with pytest.raises(ConfigurationError):
        segment_propagator(h_eff, -0.1)
    state = vectorize(gaussian_packet(grid, 0.0, 0.6))
    with pytest.raises(ConfigurationError):
        evolve_exponential(VectorizedState(grid, state.psi, 2.0), h_eff, 1.0)
    other = vectorize(gaussian_packet(GridSpec(10, -4.0, 4.0), 0.0, 0.6))
    with pytest.raises(DimensionError):
        evolve_exponential(other, h_eff, 1.0)
