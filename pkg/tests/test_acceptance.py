"""Acceptance gate: the end-to-end accuracy contracts, stated tolerances.

Each test prints one PASS/FAIL line (visible with -s or in failure
output) and then asserts.  The heavy runs (the macroscopic
superposition preset, the classical-limit scenario, the trajectory
ensembles) are shared between tests through module fixtures; the full
file takes around a quarter of an hour.
"""
import dataclasses

import numpy as np
import pytest

from grwsim.io import read_density, write_density
from grwsim.limits import (fringe_visibility, l1_distance,
                           liouville_reference, quantum_limit_check,
                           to_phase_space)
from grwsim.master import evolve, trace_distance
from grwsim.numerics import GridSpec, trapezoid_weights
from grwsim.pathint import propagate
from grwsim.scenarios import (gaussian_wave, harmonic_classical_scenario,
                              preset, with_grid)
from grwsim.superop import (build_effective_hamiltonian, devectorize,
                            evolve_exponential, vectorize)
from grwsim.unravel import ensemble_density, run_ensemble

ENSEMBLE_SEED = 7

# fields produced by accepted runs, checked again by the invariant suite
ACCEPTED = {}


def _accept(name, field):
    ACCEPTED[name] = field


def _report(name, ok, detail):
    print(f"acceptance: {name}: {'PASS' if ok else 'FAIL'} ({detail})")


def _decay_target(grid, lam_t, r_c):
    x = grid.points()
    overlap = np.exp(-((x[:, None] - x[None, :]) ** 2) / (4.0 * r_c**2))
    return np.exp(-lam_t * (1.0 - overlap))


@pytest.fixture(scope="module")
def pure_deco():
    scenario = preset("pure-decoherence")
    initial = scenario.initial()
    target = _decay_target(scenario.grid, 3.0, scenario.params.r_c)
    final, _ = evolve(initial, scenario.params, scenario.t_final, scenario.dt)
    _accept("pure-decoherence master", final)
    return scenario, initial, target, final


@pytest.fixture(scope="module")
def two_gaussian_master():
    """Free evolution of the macroscopic superposition preset, lam t = 3."""
    scenario = preset("two-gaussian-classical")
    initial = scenario.initial()
    final, _ = evolve(initial, scenario.params, scenario.t_final, scenario.dt)
    _accept("two-gaussian master", final)
    return scenario, initial, final


@pytest.fixture(scope="module")
def two_gaussian_pathint(two_gaussian_master):
    scenario, initial, _final = two_gaussian_master
    finals = {}
    for n_steps in (200, 400, 800):
        finals[n_steps] = propagate(initial, scenario.params,
                                    scenario.t_final, n_steps).field
    _accept("two-gaussian pathint 800", finals[800])
    return finals


@pytest.fixture(scope="module")
def free_ensemble():
    """10^4 jump trajectories against the deterministic reference."""
    grid = GridSpec(128, -8.0, 8.0)
    wave = gaussian_wave(grid, 0.0, 1.0)
    params = dataclasses.replace(preset("free-quantum-limit").params, lam=1.0)
    master_final, _ = evolve(wave.density(), params, 1.0, 5e-3)
    result = run_ensemble(wave, params, 1.0, 5e-3, n_traj=10000,
                          seed=ENSEMBLE_SEED)
    _accept("free master reference", master_final)
    return grid, wave, params, master_final, result


@pytest.fixture(scope="module")
def harmonic_classical_run():
    scenario = harmonic_classical_scenario()
    initial = scenario.initial()
    final, _ = evolve(initial, scenario.params, scenario.t_final, scenario.dt)
    _accept("harmonic-classical master", final)
    return scenario, initial, final


def test_pure_decoherence_decay_all_solvers(pure_deco):
    """Frozen kinetics: every solver must hit the closed-form decay."""
    scenario, initial, target, master_final = pure_deco
    master_err = float(np.max(
        np.abs(master_final.rho / initial.rho - target) / target))

    pathint_errs = {}
    for n_steps in (300, 600, 1200):
        out = propagate(initial, scenario.params, scenario.t_final, n_steps)
        pathint_errs[n_steps] = float(np.max(
            np.abs(out.field.rho / initial.rho - target)))
    orders = [np.log2(pathint_errs[n] / pathint_errs[2 * n])
              for n in (300, 600)]

    small = with_grid(scenario, GridSpec(24, -10.0, 10.0))
    initial24 = small.initial()
    h_eff = build_effective_hamiltonian(small.grid, small.params)
    final24 = devectorize(evolve_exponential(vectorize(initial24), h_eff,
                                             small.t_final))
    target24 = _decay_target(small.grid, 3.0, small.params.r_c)
    superop_err = float(np.max(
        np.abs(final24.rho / initial24.rho - target24) / target24))
    _accept("pure-decoherence superop 24", final24)

    ok = (master_err <= 1e-8 and pathint_errs[300] <= 1e-2
          and min(orders) >= 0.8 and superop_err <= 1e-8)
    _report("pure-decoherence closed-form decay", ok,
            f"master {master_err:.2e} <= 1e-8, "
            f"pathint {pathint_errs[300]:.2e} <= 1e-2 "
            f"orders {orders[0]:.2f}/{orders[1]:.2f} >= 0.8, "
            f"superop {superop_err:.2e} <= 1e-8")
    assert master_err <= 1e-8
    assert pathint_errs[300] <= 1e-2
    assert min(orders) >= 0.8
    assert superop_err <= 1e-8


def test_superop_master_equivalence():
    """Exponentiated generator vs stepped integration on the same grid."""
    scenario = preset("harmonic-oracle")
    assert scenario.grid.n_points <= 32
    initial = scenario.initial()
    final_master, _ = evolve(initial, scenario.params, scenario.t_final,
                             scenario.dt)
    h_eff = build_effective_hamiltonian(scenario.grid, scenario.params)
    final_superop = devectorize(evolve_exponential(vectorize(initial), h_eff,
                                                   scenario.t_final))
    gap = float(np.max(np.abs(final_master.rho - final_superop.rho)))
    _accept("harmonic-oracle master", final_master)
    _accept("harmonic-oracle superop", final_superop)
    _report("superop / master equivalence", gap <= 1e-6,
            f"max-abs gap {gap:.2e} <= 1e-6")
    assert gap <= 1e-6


def test_pathint_master_convergence(two_gaussian_master, two_gaussian_pathint):
    """Kernel-composition error shrinks at first order in the slice count."""
    _scenario, _initial, master_final = two_gaussian_master
    gaps = {n: float(np.max(np.abs(f.rho - master_final.rho)))
            for n, f in two_gaussian_pathint.items()}
    # one measured order across the doubling range 200 -> 800
    order = 0.5 * np.log2(gaps[200] / gaps[800])
    ok = gaps[400] < gaps[200] and gaps[800] < gaps[400] and order >= 0.8
    _report("pathint / master convergence", ok,
            f"gaps {gaps[200]:.2e}/{gaps[400]:.2e}/{gaps[800]:.2e}, "
            f"order {order:.3f} >= 0.8")
    assert gaps[400] < gaps[200]
    assert gaps[800] < gaps[400]
    assert order >= 0.8


def test_ensemble_unbiasedness(free_ensemble):
    """Trajectory average converges to the deterministic density as 1/sqrt(M)."""
    _grid, _wave, _params, master_final, result = free_ensemble
    sizes = (100, 1000, 10000)
    tds = {}
    for m in sizes:
        ens = ensemble_density(result.records[:m])
        tds[m] = trace_distance(ens, master_final)
        if m == 10000:
            _accept("ensemble density 1e4", ens)
    slope = float(np.polyfit(np.log10(sizes),
                             np.log10([tds[m] for m in sizes]), 1)[0])
    bound = 5.0 / np.sqrt(10000)
    ok = tds[10000] <= bound and -0.65 <= slope <= -0.35
    _report("ensemble unbiasedness", ok,
            f"TD(1e4) {tds[10000]:.2e} <= {bound:g}, "
            f"slope {slope:.3f} in -0.5 +- 0.15")
    assert tds[10000] <= bound
    assert -0.65 <= slope <= -0.35


def test_quantum_limit():
    """Weak collapse: first-order deviation, exact invariants at lam = 0."""
    scenario = preset("free-quantum-limit")
    initial = scenario.initial()
    report = quantum_limit_check(initial, scenario.params, scenario.t_final,
                                 scenario.dt)

    lams = (0.0025, 0.005, 0.01)
    deviations = []
    for lam in lams:
        params = dataclasses.replace(scenario.params, lam=lam)
        deviations.append(quantum_limit_check(
            initial, params, scenario.t_final, scenario.dt).max_abs_difference)
    slope = float(np.polyfit(np.log(lams), np.log(deviations), 1)[0])

    params0 = dataclasses.replace(scenario.params, lam=0.0)
    final0, _ = evolve(initial, params0, scenario.t_final, scenario.dt)
    trace_drift = abs(final0.trace() - 1.0)
    purity_drift = abs(final0.purity() - initial.purity())
    _accept("free-quantum-limit unitary", final0)

    ok = (report.relative_deviation <= 0.02 and abs(slope - 1.0) <= 0.2
          and trace_drift <= 1e-8 and purity_drift <= 1e-8)
    _report("quantum limit", ok,
            f"deviation {report.relative_deviation:.2e} <= 2e-2, "
            f"slope {slope:.3f} = 1 +- 0.2, trace drift {trace_drift:.1e}, "
            f"purity drift {purity_drift:.1e} <= 1e-8")
    assert report.relative_deviation <= 0.02
    assert report.within_bound
    assert abs(slope - 1.0) <= 0.2
    assert trace_drift <= 1e-8
    assert purity_drift <= 1e-8


def test_macroscopic_superposition_destruction(two_gaussian_master):
    """Sites 10 r_c apart, lam t = 3: coherence dies, populations stay."""
    scenario, initial, final = two_gaussian_master
    lam_t = scenario.params.lam * scenario.t_final

    frozen_params = dataclasses.replace(scenario.params, kinetic=False)
    frozen_final, _ = evolve(initial, frozen_params, scenario.t_final,
                             scenario.dt)
    _accept("two-gaussian frozen", frozen_final)
    mass_ratio = (frozen_final.offdiag_mass(scenario.params.r_c)
                  / initial.offdiag_mass(scenario.params.r_c))
    block_rel = abs(mass_ratio / np.exp(-2.0 * lam_t) - 1.0)

    weights = trapezoid_weights(scenario.grid)
    left = scenario.grid.points() < 0.0
    pops_drift = max(
        abs(float(weights[m] @ np.real(np.diag(frozen_final.rho))[m]
                  - weights[m] @ np.real(np.diag(initial.rho))[m]))
        for m in (left, ~left))

    p_grid = GridSpec(401, -12.0, 12.0)
    centers = (5.0, -5.0)
    v0 = fringe_visibility(to_phase_space(initial, p_grid), 0.0, centers)
    vt = fringe_visibility(to_phase_space(final, p_grid), 0.0, centers)
    vis_rel = abs(vt / v0 / np.exp(-lam_t) - 1.0)

    ok = block_rel <= 1e-3 and vis_rel <= 0.10 and pops_drift <= 1e-6
    _report("macroscopic superposition destruction", ok,
            f"block mass vs e^-2*{lam_t:g}: {block_rel:.2e} <= 1e-3, "
            f"visibility vs e^-{lam_t:g}: {vis_rel:.3f} <= 0.10, "
            f"population drift {pops_drift:.1e} <= 1e-6")
    assert block_rel <= 1e-3
    assert vis_rel <= 0.10
    assert pops_drift <= 1e-6


def test_classical_limit(harmonic_classical_run):
    """Strong collapse in a stiff trap follows the Liouville flow."""
    scenario, initial, final = harmonic_classical_run
    params = scenario.params
    p_grid = GridSpec(401, -48.0, 48.0)
    pf_initial = to_phase_space(initial, p_grid)
    pf_final = to_phase_space(final, p_grid)
    reference = liouville_reference(pf_initial, params, scenario.t_final)
    dist = l1_distance(pf_final, reference)

    period = 2.0 * np.pi / params.potential.omega
    around = liouville_reference(pf_initial, params, period, n_steps=1600)
    periodicity = l1_distance(pf_initial, around)

    ok = dist <= 0.05 and periodicity <= 1e-3
    _report("classical limit", ok,
            f"L1 vs Liouville {dist:.4f} <= 0.05, "
            f"period recurrence {periodicity:.2e} <= 1e-3")
    assert dist <= 0.05
    assert periodicity <= 1e-3


def test_invariant_suite(tmp_path, pure_deco, free_ensemble):
    """Trace, hermiticity, positivity, determinism, and file round trips."""
    # identical seed, identical bytes: a fresh 10-trajectory run must
    # reproduce the first 10 rows of the big batch, on disk
    _grid, wave, params, _master_final, result = free_ensemble
    rerun = run_ensemble(wave, params, 1.0, 5e-3, n_traj=10,
                         seed=ENSEMBLE_SEED)
    dens_a = ensemble_density(result.records[:10])
    dens_b = ensemble_density(rerun.records)
    path_a, path_b = tmp_path / "a.grwd", tmp_path / "b.grwd"
    write_density(dens_a, path_a)
    write_density(dens_b, path_b)
    deterministic = path_a.read_bytes() == path_b.read_bytes()

    # deterministic solver: same config twice, byte-identical snapshot
    scenario = with_grid(pure_deco[0], GridSpec(64, -10.0, 10.0))
    runs = []
    for name in ("c.grwd", "d.grwd"):
        fin, _ = evolve(scenario.initial(), scenario.params,
                        scenario.t_final, scenario.dt)
        path = tmp_path / name
        write_density(fin, path)
        runs.append(path.read_bytes())
        _accept("pure-decoherence 64", fin)
    deterministic = deterministic and runs[0] == runs[1]

    round_trip = True
    for name in ("free master reference", "pure-decoherence 64"):
        field = ACCEPTED[name]
        path = tmp_path / "rt.grwd"
        write_density(field, path)
        back = read_density(path)
        write_density(back, tmp_path / "rt2.grwd")
        round_trip = (round_trip and np.array_equal(back.rho, field.rho)
                      and path.read_bytes()
                      == (tmp_path / "rt2.grwd").read_bytes())

    worst_trace = max(abs(f.trace() - 1.0) for f in ACCEPTED.values())
    worst_herm = max(f.herm_residue() for f in ACCEPTED.values())
    small_grids = {name: f.min_eigenvalue()
                   for name, f in ACCEPTED.items() if f.grid.n_points <= 64}
    worst_eig = min(small_grids.values())

    ok = (worst_trace <= 1e-8 and worst_herm <= 1e-10 and worst_eig >= -1e-8
          and deterministic and round_trip)
    _report("invariant suite", ok,
            f"{len(ACCEPTED)} runs: |tr-1| {worst_trace:.1e} <= 1e-8, "
            f"herm {worst_herm:.1e} <= 1e-10, min eig {worst_eig:.1e} "
            f">= -1e-8 on {len(small_grids)} small grids, "
            f"determinism {deterministic}, round trip {round_trip}")
    assert worst_trace <= 1e-8
    assert worst_herm <= 1e-10
    assert worst_eig >= -1e-8
    assert deterministic
    assert round_trip
