"""Snapshot files, plot-data CSV, and config-driven runs.

Density snapshots use a fixed little-endian binary layout: a 64-byte
header (magic "GRWD", format version, payload kind, grid geometry, and
the snapshot time) followed by the row-major complex128 matrix.  Writing
is deterministic: the same field always produces the same bytes, and a
read/write round trip is bit exact.

CSV emitters print with 17 significant digits so values survive a
round trip through text exactly.
"""

import dataclasses
import json
import os
import struct
import time as _time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (BadMagicError, ConfigKeyError, DimensionError,
                     FormatVersionError, SnapshotFormatError,
                     TruncatedSnapshotError)
from .limits import CoherenceReport, PhaseField
from .master import DensityField, DiagnosticsSeries, evolve
from .numerics import GridSpec
from .pathint import build_collapse_factor, build_kernel, step_density
from .scenarios import Scenario, preset, preset_names, with_grid
from .superop import (VectorizedState, build_effective_hamiltonian,
                      devectorize, evolve_exponential, segment_propagator,
                      vectorize)
from .unravel import WaveField, ensemble_density, run_ensemble

MAGIC = b"GRWD"
FORMAT_VERSION = 1
KIND_DENSITY = 1
HEADER_SIZE = 64
_HEADER_STRUCT = struct.Struct("<4sHBxI3d")

SCHEMA_VERSION = 1

ENV_OUTPUT_DIR = "GRWSIM_OUT"


@dataclass(frozen=True)
class FieldFileHeader:
    """Decoded snapshot header."""

    version: int
    kind: int
    n_points: int
    x_min: float
    x_max: float
    time: float

    def grid(self) -> GridSpec:
        return GridSpec(self.n_points, self.x_min, self.x_max)


def _pack_header(field: DensityField) -> bytes:
    head = _HEADER_STRUCT.pack(MAGIC, FORMAT_VERSION, KIND_DENSITY,
                               field.grid.n_points, field.grid.x_min,
                               field.grid.x_max, field.time)
    return head + b"\x00" * (HEADER_SIZE - len(head))


def write_density(field: DensityField, path) -> None:
    """Write a density snapshot; same field, same bytes, every time."""
    payload = np.ascontiguousarray(field.rho.astype("<c16", copy=False))
    with open(path, "wb") as fh:
        fh.write(_pack_header(field))
        fh.write(payload.tobytes())


def read_header(path) -> FieldFileHeader:
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
    if len(head) < HEADER_SIZE:
        raise TruncatedSnapshotError(
            f"{path}: only {len(head)} of {HEADER_SIZE} header bytes present")
    magic, version, kind, n_points, x_min, x_max, t = \
        _HEADER_STRUCT.unpack(head[:_HEADER_STRUCT.size])
    if magic != MAGIC:
        raise BadMagicError(f"{path}: magic {magic!r} is not {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatVersionError(
            f"{path}: format version {version}, this build reads "
            f"{FORMAT_VERSION}")
    if kind != KIND_DENSITY:
        raise SnapshotFormatError(f"{path}: unknown payload kind {kind}")
    return FieldFileHeader(version, kind, n_points, x_min, x_max, t)


def read_density(path) -> DensityField:
    """Read a density snapshot written by write_density."""
    header = read_header(path)
    n = header.n_points
    expected = 16 * n * n
    with open(path, "rb") as fh:
        fh.seek(HEADER_SIZE)
        payload = fh.read()
    if len(payload) < expected:
        raise TruncatedSnapshotError(
            f"{path}: payload has {len(payload)} of {expected} bytes")
    if len(payload) > expected:
        raise SnapshotFormatError(
            f"{path}: {len(payload) - expected} trailing bytes after payload")
    rho = np.frombuffer(payload, dtype="<c16").reshape(n, n).astype(complex)
    return DensityField(header.grid(), rho, header.time)


def _format_row(values) -> str:
    return ",".join(f"{v:.17g}" for v in values)


def emit_plot_data(obj, path) -> None:
    """Write a plot-ready CSV for a diagnostics series, coherence report,
    or phase-space field.  Deterministic text output."""
    lines = [f"# grwsim schema={SCHEMA_VERSION}"]
    if isinstance(obj, DiagnosticsSeries):
        lines.append("# kind=diagnostics")
        lines.append(",".join(DiagnosticsSeries.COLUMNS))
        for row in obj.as_columns():
            lines.append(_format_row(row))
    elif isinstance(obj, CoherenceReport):
        lines.append("# kind=coherence")
        lines.append(",".join(CoherenceReport.COLUMNS))
        for row in obj.as_columns():
            lines.append(_format_row(row))
    elif isinstance(obj, PhaseField):
        lines.append("# kind=phase-field")
        lines.append(f"# time={obj.time:.17g}")
        lines.append("q,p,value")
        qs = obj.q_grid.points()
        ps = obj.p_grid.points()
        for i, q in enumerate(qs):
            for j, p in enumerate(ps):
                lines.append(_format_row((q, p, obj.values[i, j])))
    else:
        raise DimensionError(
            f"no plot-data emitter for {type(obj).__name__}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


_SOLVERS = ("master", "superop", "pathint", "unravel")


@dataclass
class RunConfig:
    """Validated description of one simulation run."""

    scenario: str
    solver: str
    t_final: float = None
    dt: float = None
    n_steps: int = None
    n_traj: int = None
    seed: int = None
    sample_every: int = 200
    n_points: int = None
    lam: float = None
    output_dir: str = None

    def as_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items()
                if v is not None}


def _require(cond, key, message):
    if not cond:
        raise ConfigKeyError(key, message)


def parse_config(source) -> RunConfig:
    """Build a RunConfig from a JSON string or an already-parsed dict.

    Every constraint failure names the offending key.
    """
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigKeyError("<document>", f"not valid JSON: {exc}") from None
    else:
        doc = dict(source)
    _require(isinstance(doc, dict), "<document>", "top level must be an object")

    known = {f.name for f in dataclasses.fields(RunConfig)}
    for key in doc:
        _require(key in known, key, "unknown key")

    _require("scenario" in doc, "scenario", "is required")
    _require(doc["scenario"] in preset_names(), "scenario",
             f"unknown preset '{doc.get('scenario')}'; "
             f"available: {', '.join(preset_names())}")
    _require("solver" in doc, "solver", "is required")
    _require(doc["solver"] in _SOLVERS, "solver",
             f"must be one of {', '.join(_SOLVERS)}")

    def positive_number(key):
        if key in doc:
            _require(isinstance(doc[key], (int, float))
                     and not isinstance(doc[key], bool)
                     and doc[key] > 0, key, "must be a positive number")

    def positive_int(key, minimum=1):
        if key in doc:
            _require(isinstance(doc[key], int) and not isinstance(doc[key], bool)
                     and doc[key] >= minimum, key,
                     f"must be an integer >= {minimum}")

    positive_number("t_final")
    positive_number("dt")
    positive_int("n_steps")
    positive_int("n_traj")
    positive_int("sample_every")
    positive_int("n_points", minimum=8)
    if "seed" in doc:
        _require(isinstance(doc["seed"], int) and not isinstance(doc["seed"], bool)
                 and doc["seed"] >= 0, "seed", "must be a non-negative integer")
    if "lam" in doc:
        _require(isinstance(doc["lam"], (int, float))
                 and not isinstance(doc["lam"], bool) and doc["lam"] >= 0,
                 "lam", "must be a number >= 0")
    if "output_dir" in doc:
        _require(isinstance(doc["output_dir"], str), "output_dir",
                 "must be a string")

    if doc["solver"] == "unravel":
        _require("seed" in doc, "seed",
                 "is required for the stochastic solver; runs must be "
                 "reproducible")
        _require("n_traj" in doc, "n_traj",
                 "is required for the stochastic solver")
    if doc["solver"] == "pathint":
        _require("n_steps" in doc, "n_steps",
                 "is required for the kernel-composition solver")
    return RunConfig(**doc)


def resolve_scenario(config: RunConfig) -> Scenario:
    scenario = preset(config.scenario)
    if config.n_points is not None:
        scenario = with_grid(scenario, GridSpec(
            config.n_points, scenario.grid.x_min, scenario.grid.x_max))
    if config.lam is not None:
        scenario = dataclasses.replace(
            scenario, params=dataclasses.replace(scenario.params,
                                                 lam=config.lam))
    if config.t_final is not None:
        scenario = dataclasses.replace(scenario, t_final=config.t_final)
    if config.dt is not None:
        scenario = dataclasses.replace(scenario, dt=config.dt)
    return scenario


def solve_final(scenario: Scenario, solver: str, n_steps: int = None,
                seed: int = None, n_traj: int = None) -> DensityField:
    """Evolve the scenario to its t_final with one solver, no files."""
    initial = scenario.initial()
    if solver == "master":
        final, _ = evolve(initial, scenario.params, scenario.t_final,
                          scenario.dt)
        return final
    if solver == "superop":
        h_eff = build_effective_hamiltonian(scenario.grid, scenario.params)
        return devectorize(evolve_exponential(vectorize(initial), h_eff,
                                              scenario.t_final))
    if solver == "pathint":
        from .pathint import propagate
        if n_steps is None:
            raise ConfigKeyError("n_steps", "is required for pathint")
        return propagate(initial, scenario.params, scenario.t_final,
                         n_steps).field
    if solver == "unravel":
        if seed is None or n_traj is None:
            raise ConfigKeyError("seed", "seed and n_traj are required "
                                 "for unravel")
        wave = _initial_wave(scenario)
        result = run_ensemble(wave, scenario.params, scenario.t_final,
                              scenario.dt, n_traj=n_traj, seed=seed)
        return ensemble_density(result.records)
    raise ConfigKeyError("solver", f"unknown solver '{solver}'")


def _initial_wave(scenario: Scenario) -> WaveField:
    """Pure initial states only: factor rho back into a wave function."""
    initial = scenario.initial()
    purity = initial.purity()
    if abs(purity - 1.0) > 1e-6:
        raise ConfigKeyError(
            "solver", f"scenario '{scenario.name}' starts from a mixed state "
            f"(purity {purity:.6f}); the trajectory solver needs a pure one")
    evals, evecs = np.linalg.eigh(initial.rho * initial.grid.dx)
    psi = evecs[:, -1] * np.sqrt(max(evals[-1], 0.0) / initial.grid.dx)
    return WaveField(initial.grid, psi, initial.time)


def _output_dir(config: RunConfig, override=None) -> str:
    out = override or config.output_dir or os.environ.get(ENV_OUTPUT_DIR) \
        or "grwsim-out"
    os.makedirs(out, exist_ok=True)
    return out


@dataclass
class RunResult:
    output_dir: str
    manifest_path: str
    snapshots: list
    csv_files: list
    status: str


def run(config: RunConfig, output_dir: str = None) -> RunResult:
    """Execute a configured run and write its artifacts.

    Snapshots are written at every sample_every-th step boundary plus
    the initial and final times.  A manifest records the configuration
    and outputs; it is written with status "failed" and the error text
    if anything throws, so partial output directories are always
    marked.
    """
    out = _output_dir(config, output_dir)
    manifest_path = os.path.join(out, "run_manifest.json")
    snapshots, csv_files = [], []
    started = _time.time()
    try:
        scenario = resolve_scenario(config)
        _dispatch_run(config, scenario, out, snapshots, csv_files)
        status = "ok"
    except Exception as exc:
        _write_manifest(manifest_path, config, snapshots, csv_files,
                        "failed", started, error=f"{type(exc).__name__}: {exc}")
        raise
    _write_manifest(manifest_path, config, snapshots, csv_files, "ok", started)
    return RunResult(out, manifest_path, snapshots, csv_files, "ok")


def _snap_path(out, index):
    return os.path.join(out, f"rho_{index:05d}.grwd")


def _dispatch_run(config, scenario, out, snapshots, csv_files):
    params = scenario.params
    t_final, dt = scenario.t_final, scenario.dt

    def snap(field, index):
        path = _snap_path(out, index)
        write_density(field, path)
        snapshots.append(path)

    if config.solver == "master":
        field = scenario.initial()
        snap(field, 0)
        n_steps = int(np.ceil(t_final / dt - 1e-12))
        boundaries = [min(k * dt, t_final)
                      for k in range(config.sample_every, n_steps,
                                     config.sample_every)]
        boundaries.append(t_final)
        all_cols = []
        for i, t_next in enumerate(boundaries):
            field, diag = evolve(field, params, t_next, dt)
            cols = diag.as_columns()
            all_cols.append(cols if i == 0 else cols[1:])
            snap(field, i + 1)
        stitched = np.vstack(all_cols)
        series = DiagnosticsSeries(*[stitched[:, k] for k in range(6)])
        diag_path = os.path.join(out, "diagnostics.csv")
        emit_plot_data(series, diag_path)
        csv_files.append(diag_path)
    elif config.solver == "superop":
        field = scenario.initial()
        snap(field, 0)
        h_eff = build_effective_hamiltonian(scenario.grid, params)
        psi = vectorize(field).psi
        sample_dt = min(config.sample_every * dt, t_final)
        u_seg = segment_propagator(h_eff, sample_dt)
        t, index = 0.0, 1
        eps = 1e-12 * max(dt, 1.0)
        while t_final - t > sample_dt + eps:
            psi = u_seg @ psi
            t += sample_dt
            snap(devectorize(VectorizedState(scenario.grid, psi, t)), index)
            index += 1
        if t_final - t > eps:
            psi = segment_propagator(h_eff, t_final - t) @ psi
        snap(devectorize(VectorizedState(scenario.grid, psi, t_final)), index)
    elif config.solver == "pathint":
        field = scenario.initial()
        snap(field, 0)
        epsilon = t_final / config.n_steps
        kernel = build_kernel(scenario.grid, params, epsilon)
        factor = build_collapse_factor(scenario.grid, params, epsilon)
        index = 1
        for k in range(config.n_steps):
            field = step_density(field, kernel, factor)
            if (k + 1) % config.sample_every == 0 or k + 1 == config.n_steps:
                snap(field, index)
                index += 1
    elif config.solver == "unravel":
        wave = _initial_wave(scenario)
        snap(wave.density(), 0)
        result = run_ensemble(wave, params, t_final, dt,
                              n_traj=config.n_traj, seed=config.seed,
                              sample_every=config.sample_every)
        for i, sample in enumerate(result.samples):
            snap(sample, i + 1)
    else:
        raise ConfigKeyError("solver", f"unknown solver '{config.solver}'")


def _write_manifest(path, config, snapshots, csv_files, status, started,
                    error=None):
    doc = {
        "schema": SCHEMA_VERSION,
        "package_version": __version__,
        "config": config.as_dict(),
        "outputs": {
            "snapshots": [os.path.basename(p) for p in snapshots],
            "csv": [os.path.basename(p) for p in csv_files],
        },
        "status": status,
        "wall_seconds": round(_time.time() - started, 3),
    }
    if error is not None:
        doc["error"] = error
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
