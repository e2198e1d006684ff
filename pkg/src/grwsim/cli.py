"""Command-line interface.

Subcommands: evolve (deterministic solvers), unravel (stochastic
ensemble), compare (two solvers against each other), classical-limit
(phase-space flow against the Liouville reference), validate (snapshot
file checks).  Exit codes: 0 success, 1 failed physics or validation,
2 bad usage, configuration, or file format.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .errors import (ConfigKeyError, GrwSimError, SnapshotFormatError,
                     ValidationError)
from .io import (RunConfig, emit_plot_data, parse_config, read_density,
                 read_header, resolve_scenario, run, solve_final)
from .limits import aligned_delta_grid, l1_distance, liouville_reference, to_phase_space
from .master import evolve, trace_distance
from .numerics import GridSpec
from .scenarios import harmonic_classical_scenario, preset_names, with_grid


def _load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigKeyError("<config file>", str(exc)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigKeyError("<config file>", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigKeyError("<config file>", "top level must be an object")
    return doc


_OVERRIDE_KEYS = ("scenario", "t_final", "dt", "n_steps", "n_traj", "seed",
                  "sample_every", "n_points", "lam", "output_dir")


def _merged_config(args, solver) -> RunConfig:
    doc = _load_config_file(args.config) if getattr(args, "config", None) else {}
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    doc["solver"] = solver
    return parse_config(doc)


def _add_run_args(parser, with_scenario=True):
    parser.add_argument("--config", help="JSON config file; flags override it")
    if with_scenario:
        parser.add_argument("--scenario", choices=preset_names(),
                            help="benchmark preset to run")
    parser.add_argument("--t-final", type=float, dest="t_final",
                        help="override the preset final time")
    parser.add_argument("--dt", type=float, help="override the preset step")
    parser.add_argument("--sample-every", type=int, dest="sample_every",
                        help="steps between snapshots")
    parser.add_argument("--n-points", type=int, dest="n_points",
                        help="rebuild the preset grid with this many points")
    parser.add_argument("--lam", type=float, help="override the collapse rate")
    parser.add_argument("--output", dest="output_dir",
                        help="output directory (default: $GRWSIM_OUT or "
                             "./grwsim-out)")


def _cmd_evolve(args) -> int:
    config = _merged_config(args, args.solver)
    result = run(config)
    print(f"wrote {len(result.snapshots)} snapshots and "
          f"{len(result.csv_files)} csv files to {result.output_dir}")
    print(f"manifest: {result.manifest_path}")
    return 0


def _cmd_unravel(args) -> int:
    config = _merged_config(args, "unravel")
    result = run(config)
    print(f"wrote {len(result.snapshots)} ensemble snapshots to "
          f"{result.output_dir}")
    print(f"manifest: {result.manifest_path}")
    return 0


def _cmd_compare(args) -> int:
    config = _merged_config(args, args.solver_a)
    scenario = resolve_scenario(config)
    kwargs = dict(n_steps=config.n_steps, seed=config.seed,
                  n_traj=config.n_traj)
    field_a = solve_final(scenario, args.solver_a, **kwargs)
    field_b = solve_final(scenario, args.solver_b, **kwargs)
    gap = float(np.max(np.abs(field_a.rho - field_b.rho)))
    dist = trace_distance(field_a, field_b)
    print(f"{scenario.name} at t = {scenario.t_final:g}: "
          f"{args.solver_a} vs {args.solver_b}: "
          f"max-abs gap = {gap:.6e}, trace distance = {dist:.6e}")
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        report = {
            "scenario": scenario.name,
            "t_final": scenario.t_final,
            "solver_a": args.solver_a,
            "solver_b": args.solver_b,
            "max_abs_gap": gap,
            "trace_distance": dist,
        }
        path = os.path.join(args.output_dir, "compare.json")
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"report: {path}")
    if args.tolerance is not None and gap > args.tolerance:
        print(f"FAIL: gap {gap:.6e} exceeds tolerance {args.tolerance:g}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_classical_limit(args) -> int:
    scenario = harmonic_classical_scenario()
    if args.n_points is not None:
        scenario = with_grid(scenario, GridSpec(
            args.n_points, scenario.grid.x_min, scenario.grid.x_max))
    if args.t_final is not None:
        scenario = dataclasses.replace(scenario, t_final=args.t_final)
    if args.dt is not None:
        scenario = dataclasses.replace(scenario, dt=args.dt)
    params = scenario.params
    initial = scenario.initial()
    final, _ = evolve(initial, params, scenario.t_final, scenario.dt)
    p_grid = GridSpec(args.p_points, -args.p_max, args.p_max)
    delta_grid = aligned_delta_grid(scenario.grid, args.delta_span)
    pf_initial = to_phase_space(initial, p_grid, hbar=params.hbar,
                                delta_grid=delta_grid)
    pf_final = to_phase_space(final, p_grid, hbar=params.hbar,
                              delta_grid=delta_grid)
    reference = liouville_reference(pf_initial, params, scenario.t_final,
                                    n_steps=args.liouville_steps)
    dist = l1_distance(pf_final, reference)
    print(f"{scenario.name}: relative L1 distance between collapse-evolved "
          f"and Liouville phase fields over t = {scenario.t_final:g}: "
          f"{dist:.6f}")
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        emit_plot_data(pf_initial,
                       os.path.join(args.output_dir, "phase_initial.csv"))
        emit_plot_data(pf_final,
                       os.path.join(args.output_dir, "phase_final.csv"))
        emit_plot_data(reference,
                       os.path.join(args.output_dir, "phase_liouville.csv"))
        report = {
            "scenario": scenario.name,
            "t_final": scenario.t_final,
            "lam_t": params.lam * scenario.t_final,
            "l1_distance": dist,
        }
        path = os.path.join(args.output_dir, "classical_limit.json")
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote phase-space csv files and report to {args.output_dir}")
    if args.tolerance is not None and dist > args.tolerance:
        print(f"FAIL: L1 distance {dist:.6f} exceeds tolerance "
              f"{args.tolerance:g}", file=sys.stderr)
        return 1
    return 0


def _cmd_validate(args) -> int:
    header = read_header(args.path)
    field = read_density(args.path)
    print(f"{args.path}: format v{header.version}, "
          f"{header.n_points} points on [{header.x_min:g}, {header.x_max:g}], "
          f"t = {header.time:g}")
    check_eigs = args.positivity or header.n_points <= 64
    try:
        field.validate(check_positivity=check_eigs)
    except ValidationError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    tr = field.trace()
    print(f"trace = {tr:.12f}, hermiticity residue = "
          f"{field.herm_residue():.3e}"
          + (f", min eigenvalue = {field.min_eigenvalue():.3e}"
             if check_eigs else ""))
    print("OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grwsim",
        description="1-D spontaneous-localisation density-matrix simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_evolve = sub.add_parser(
        "evolve", help="run a deterministic solver on a preset")
    _add_run_args(p_evolve)
    p_evolve.add_argument("--solver", default="master",
                          choices=("master", "superop", "pathint"))
    p_evolve.add_argument("--n-steps", type=int, dest="n_steps",
                          help="slice count (pathint solver)")
    p_evolve.set_defaults(func=_cmd_evolve)

    p_unravel = sub.add_parser(
        "unravel", help="run a stochastic trajectory ensemble")
    _add_run_args(p_unravel)
    p_unravel.add_argument("--seed", type=int, help="ensemble seed (required)")
    p_unravel.add_argument("--n-traj", type=int, dest="n_traj",
                           help="number of trajectories (required)")
    p_unravel.set_defaults(func=_cmd_unravel)

    p_compare = sub.add_parser(
        "compare", help="evolve one preset with two solvers and report gaps")
    _add_run_args(p_compare)
    p_compare.add_argument("--solver-a", default="master",
                           choices=("master", "superop", "pathint", "unravel"))
    p_compare.add_argument("--solver-b", default="superop",
                           choices=("master", "superop", "pathint", "unravel"))
    p_compare.add_argument("--n-steps", type=int, dest="n_steps")
    p_compare.add_argument("--seed", type=int)
    p_compare.add_argument("--n-traj", type=int, dest="n_traj")
    p_compare.add_argument("--tolerance", type=float,
                           help="exit 1 if the max-abs gap exceeds this")
    p_compare.set_defaults(func=_cmd_compare)

    p_classical = sub.add_parser(
        "classical-limit",
        help="compare strong-collapse phase-space flow with Liouville")
    p_classical.add_argument("--p-max", type=float, default=48.0,
                             dest="p_max", help="momentum half range")
    p_classical.add_argument("--p-points", type=int, default=129,
                             dest="p_points")
    p_classical.add_argument("--delta-span", type=float, default=1.05,
                             dest="delta_span",
                             help="half range of the separation lattice")
    p_classical.add_argument("--liouville-steps", type=int, default=400,
                             dest="liouville_steps")
    p_classical.add_argument("--n-points", type=int, dest="n_points",
                             help="rebuild the scenario grid (smoke testing)")
    p_classical.add_argument("--t-final", type=float, dest="t_final",
                             help="override the scenario final time")
    p_classical.add_argument("--dt", type=float,
                             help="override the scenario step")
    p_classical.add_argument("--tolerance", type=float,
                             help="exit 1 if the L1 distance exceeds this")
    p_classical.add_argument("--output", dest="output_dir",
                             help="write phase-space csv files here")
    p_classical.set_defaults(func=_cmd_classical_limit)

    p_validate = sub.add_parser(
        "validate", help="check a snapshot file and its invariants")
    p_validate.add_argument("path")
    p_validate.add_argument("--positivity", action="store_true",
                            help="run the eigenvalue check even on large grids")
    p_validate.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigKeyError, SnapshotFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GrwSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
