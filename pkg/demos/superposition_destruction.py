"""Destruction of a macroscopic superposition, lam T = 3.

Two packets ten collapse widths apart.  The cross blocks of the density
matrix die like exp(-lam t) while the two populations do not move; in
phase space the interference fringe at the midpoint fades at the same
rate.  Runs a coarsened variant of the two-gaussian-classical preset so
it finishes in seconds.
"""
import dataclasses

import numpy as np

from grwsim.limits import coherence_report
from grwsim.master import evolve
from grwsim.numerics import GridSpec, trapezoid_weights
from grwsim.scenarios import preset, with_grid

scenario = with_grid(preset("two-gaussian-classical"),
                     GridSpec(400, -7.2, 7.2))
scenario = dataclasses.replace(scenario, dt=2e-4)
params = scenario.params
lam_t = params.lam * scenario.t_final
print(f"{scenario.name} (coarsened): lam T = {lam_t:g}, "
      f"sites 10 r_c apart\n")

initial = scenario.initial()
snapshots = [initial]
field = initial
for _ in range(3):
    field, _ = evolve(field, params, field.time + scenario.t_final / 3,
                      scenario.dt)
    snapshots.append(field)

p_grid = GridSpec(321, -12.0, 12.0)
report = coherence_report(snapshots, params, p_grid=p_grid,
                          blob_centers=(5.0, -5.0))

print("  t      lam t   offdiag mass    visibility   exp(-lam t)")
for k, t in enumerate(report.times):
    print(f"  {t:.3f}  {params.lam * t:5.2f}   "
          f"{report.offdiag_mass[k]:.6e}   {report.visibility[k]:8.5f}     "
          f"{report.predicted_damping[k]:.5f}")

ratio = report.offdiag_mass[-1] / report.offdiag_mass[0]
print(f"\ncross-block mass ratio = {ratio:.5e} "
      f"(squared amplitudes: e^-2 lam T = {np.exp(-2 * lam_t):.5e})")

# populations: mass on each side of the midpoint, frozen against motion
weights = trapezoid_weights(scenario.grid)
left = scenario.grid.points() < 0
for name, mask in (("left", left), ("right", ~left)):
    p0 = weights[mask] @ np.real(np.diag(initial.rho))[mask]
    p1 = weights[mask] @ np.real(np.diag(snapshots[-1].rho))[mask]
    print(f"{name:>5} population: {p0:.9f} -> {p1:.9f}")
print("\nthe superposition is gone; the statistical mixture remains")
