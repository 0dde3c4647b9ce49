"""Execute an :class:`ExperimentConfig` and write its tables plus a manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .. import __version__
from ..errors import NumericContractError, OutputError
from ..lattice import (
    LatticeSpec,
    PotentialProfile,
    RuleParams,
    StateVector,
    basis_state,
    build_rule,
    evolve,
    random_state,
    square_well,
    verify_unitarity,
)
from ..linalg import SpectralResult, assemble_global_U, eigendecompose_unitary
from ..packets import WavePacketSpec, track_packet, wave_packet, well_regions
from ..spectral import (
    PlaneWaveIndex,
    dispersion_omega,
    fourier_amplitudes,
    left_moving_probability,
    plane_wave,
)
from .config import DYNAMIC_OUTPUTS, ExperimentConfig

log = logging.getLogger(__name__)

TRAJECTORY_FIELDS = ("t", "x", "re_minus", "im_minus", "re_plus", "im_plus", "prob")
DENSITY_FIELDS = ("t", "x", "prob")
SPECTRUM_FIELDS = ("n", "epsilon", "re_amp", "im_amp", "prob")
DISPERSION_FIELDS = ("k", "omega_plus", "omega_minus")
BANDS_FIELDS = ("phi", "j", "omega")
MODE_DENSITY_FIELDS = ("j", "omega", "x", "prob")
RULE_TOL = 1e-10
NORM_DRIFT_TOL = 1e-9


def eigenpair_fields(N: int) -> tuple[str, ...]:
    comps = []
    for i in range(2 * N):
        comps += [f"re_{i}", f"im_{i}"]
    return ("j", "omega", *comps)


@dataclass
class Table:
    fields: Sequence[str]
    rows: list[tuple]


@dataclass
class OutputRecord:
    name: str
    path: str
    sha256: str
    rows: int


@dataclass
class RunManifest:
    config: dict
    tool: str
    version: str
    started: str
    finished: str
    format: str
    outputs: list[OutputRecord] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    path: str | None = None

    def to_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "format": self.format,
            "config": self.config,
            "outputs": [vars(o) for o in self.outputs],
            "summary": self.summary,
        }

    def output(self, name: str) -> OutputRecord:
        for o in self.outputs:
            if o.name == name:
                return o
        raise KeyError(name)


def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _plain(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def render_table(table: Table, fmt: str) -> bytes:
    if fmt == "csv":
        lines = [",".join(table.fields)]
        lines += [",".join(_cell(v) for v in row) for row in table.rows]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "json":
        records = [dict(zip(table.fields, map(_plain, row))) for row in table.rows]
        return (json.dumps({"fields": list(table.fields), "records": records}) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read back a CSV or JSON table as ``(fields, 2-D float array)``."""
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        fields = data["fields"]
        arr = np.array([[rec[f] for f in fields] for rec in data["records"]], dtype=float)
        return fields, arr.reshape(-1, len(fields))
    with path.open() as fh:
        fields = fh.readline().strip().split(",")
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return fields, arr


# ----------------------------------------------------------------------------
# tables


def initial_state(cfg: ExperimentConfig, params: RuleParams, lattice: LatticeSpec) -> StateVector:
    init = cfg.initial
    if init.kind == "plane_wave":
        return plane_wave(PlaneWaveIndex(init.n, init.epsilon), params, lattice)
    if init.kind == "packet":
        return wave_packet(WavePacketSpec(init.k0, init.x0, init.s, init.epsilon), params, lattice)
    if init.kind == "basis":
        return basis_state(lattice, init.x, init.alpha)
    return random_state(lattice, np.random.default_rng(cfg.seed))


def potential_for(cfg: ExperimentConfig, lattice: LatticeSpec, depth: float | None = None) -> PotentialProfile:
    if cfg.potential.kind == "none":
        return PotentialProfile.zero(lattice)
    return square_well(lattice, cfg.potential.depth if depth is None else depth)


def trajectory_table(trajectory: Sequence[StateVector]) -> Table:
    rows = []
    for t, state in enumerate(trajectory):
        a = state.amps
        prob = np.sum(np.abs(a) ** 2, axis=1)
        for x in range(a.shape[0]):
            m, p = a[x]
            rows.append((t, x, m.real, m.imag, p.real, p.imag, prob[x]))
    return Table(TRAJECTORY_FIELDS, rows)


def density_table(trajectory: Sequence[StateVector]) -> Table:
    rows = []
    for t, state in enumerate(trajectory):
        prob = np.sum(np.abs(state.amps) ** 2, axis=1)
        rows.extend((t, x, prob[x]) for x in range(prob.shape[0]))
    return Table(DENSITY_FIELDS, rows)


def spectrum_table(state: StateVector, params: RuleParams) -> Table:
    spec = fourier_amplitudes(state, params)
    rows = []
    for n in range(state.lattice.N):
        for b, eps in enumerate((1, -1)):
            a = spec.amps[n, b]
            rows.append((n, eps, a.real, a.imag, abs(a) ** 2))
    return Table(SPECTRUM_FIELDS, rows)


def dispersion_grid(resolution: int) -> np.ndarray:
    """``resolution`` wave numbers in ``(-pi, pi]``, ending exactly at pi."""
    i = np.arange(1, resolution + 1)
    return -math.pi + 2.0 * math.pi * i / resolution


def emit_dispersion(params: RuleParams, resolution: int) -> Table:
    """Rows ``(k, +omega, -omega)`` over ``k`` in ``(-pi, pi]``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    k = dispersion_grid(resolution)
    omega = dispersion_omega(k, params)
    return Table(DISPERSION_FIELDS, [(kk, w, -w) for kk, w in zip(k, omega)])


def eigensolve(params: RuleParams, lattice: LatticeSpec, potential: PotentialProfile) -> SpectralResult:
    return eigendecompose_unitary(assemble_global_U(build_rule(params), potential, lattice))


def select_modes(cfg: ExperimentConfig, result: SpectralResult) -> np.ndarray:
    if cfg.modes.kind == "lowest_positive":
        return result.lowest_positive(cfg.modes.count)
    if cfg.modes.kind == "nearest":
        return np.array([result.nearest(cfg.modes.omega)])
    return np.arange(len(result))


def eigenpair_table(result: SpectralResult, indices: Iterable[int], N: int) -> Table:
    rows = []
    for j in indices:
        v = result.vectors[:, j]
        comps = np.empty(4 * N)
        comps[0::2], comps[1::2] = v.real, v.imag
        rows.append((int(j), result.omegas[j], *comps))
    return Table(eigenpair_fields(N), rows)


def mode_density_table(result: SpectralResult, indices: Iterable[int]) -> Table:
    rows = []
    for j in indices:
        dens = result.site_density(j)
        rows.extend((int(j), result.omegas[j], x, dens[x]) for x in range(dens.shape[0]))
    return Table(MODE_DENSITY_FIELDS, rows)


def band_sweep(cfg: ExperimentConfig, params: RuleParams, lattice: LatticeSpec) -> tuple[np.ndarray, list[SpectralResult]]:
    depths = np.linspace(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.count)
    solve = lambda phi: eigensolve(params, lattice, square_well(lattice, phi))  # noqa: E731
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(solve, depths))  # map keeps depth order
    return depths, results


def bands_table(depths: np.ndarray, results: Sequence[SpectralResult]) -> Table:
    rows = []
    for phi, res in zip(depths, results):
        rows.extend((phi, j, w) for j, w in enumerate(res.omegas))
    return Table(BANDS_FIELDS, rows)


def diagnostics_table(diag, regions) -> Table:
    fields = ["t", "peak", "unwrapped_peak", "peak_prob", "norm"]
    fields += [f"region_{a}_{b}" for a, b in regions]
    rows = []
    for t in range(diag.peak_positions.shape[0]):
        rows.append((
            t,
            int(diag.peak_positions[t]),
            int(diag.unwrapped_peaks[t]),
            diag.peak_probabilities[t],
            diag.norms[t],
            *diag.region_probabilities[t],
        ))
    return Table(fields, rows)


# ----------------------------------------------------------------------------
# orchestration


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def compute_tables(cfg: ExperimentConfig) -> tuple[dict[str, Table], dict]:
    """All requested tables plus a summary of headline numbers, without I/O."""
    params = RuleParams(cfg.theta, cfg.rho)
    lattice = LatticeSpec(cfg.N)
    rule = build_rule(params)
    residual = verify_unitarity(rule)
    if residual > RULE_TOL:
        raise NumericContractError(f"local rule unitarity residual {residual:.3e}")
    potential = potential_for(cfg, lattice)
    tables: dict[str, Table] = {}
    summary: dict = {"rule_unitarity_residual": residual}

    wanted = set(cfg.outputs)
    if wanted & DYNAMIC_OUTPUTS:
        state0 = initial_state(cfg, params, lattice)
        trajectory = evolve(state0, rule, potential, cfg.steps)
        norms = np.array([s.norm() for s in trajectory])
        drift = float(np.abs(norms - norms[0]).max())
        if drift > NORM_DRIFT_TOL:
            raise NumericContractError(f"norm drift {drift:.3e} over {cfg.steps} steps")
        summary["norm_drift"] = drift
        spectrum0 = fourier_amplitudes(state0, params)
        summary["left_moving_probability"] = left_moving_probability(spectrum0)
        if "trajectory" in wanted:
            tables["trajectory"] = trajectory_table(trajectory)
        if "density" in wanted:
            tables["density"] = density_table(trajectory)
        if "spectrum" in wanted:
            tables["spectrum"] = spectrum_table(state0, params)
        if "diagnostics" in wanted:
            regions = cfg.regions or (
                well_regions(lattice) if cfg.potential.kind != "none" else [(0, lattice.N)]
            )
            diag = track_packet(trajectory, regions)
            tables["diagnostics"] = diagnostics_table(diag, diag.regions)
            summary.update(
                initial_peak=int(diag.peak_positions[0]),
                final_peak=int(diag.peak_positions[-1]),
                displacement=int(diag.unwrapped_peaks[-1] - diag.unwrapped_peaks[0]),
                measured_group_velocity=diag.measured_group_velocity,
                initial_peak_probability=float(diag.peak_probabilities[0]),
                final_peak_probability=float(diag.peak_probabilities[-1]),
                regions=[list(r) for r in diag.regions],
                final_region_probabilities=[float(p) for p in diag.region_probabilities[-1]],
            )

    if "dispersion" in wanted:
        table = emit_dispersion(params, cfg.resolution)
        tables["dispersion"] = table
        omegas = np.array([row[1] for row in table.rows])
        summary.update(min_abs_omega=float(omegas.min()), max_abs_omega=float(omegas.max()))

    if wanted & {"eigenpairs", "mode_density"}:
        result = eigensolve(params, lattice, potential)
        idx = select_modes(cfg, result)
        summary["max_eigen_residual"] = float(result.residuals.max())
        summary["selected_omegas"] = [float(result.omegas[j]) for j in idx]
        if "eigenpairs" in wanted:
            tables["eigenpairs"] = eigenpair_table(result, idx, lattice.N)
        if "mode_density" in wanted:
            tables["mode_density"] = mode_density_table(result, idx)

    if "bands" in wanted:
        depths, results = band_sweep(cfg, params, lattice)
        tables["bands"] = bands_table(depths, results)
        summary["max_eigen_residual"] = float(max(r.residuals.max() for r in results))

    return tables, summary


def run(cfg: ExperimentConfig, out_dir: str | Path = "out", fmt: str = "csv") -> RunManifest:
    """Compute every requested output, write it under ``out_dir`` and return the manifest."""
    cfg.validate()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    started = _now()
    log.info("running scenario %s", cfg.scenario)
    tables, summary = compute_tables(cfg)

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        records = []
        for name in cfg.outputs:
            payload = render_table(tables[name], fmt)
            path = out_dir / f"{cfg.scenario}_{name}.{fmt}"
            path.write_bytes(payload)
            records.append(
                OutputRecord(name, str(path), hashlib.sha256(payload).hexdigest(), len(tables[name].rows))
            )
        manifest = RunManifest(
            config=cfg.to_dict(),
            tool="qlga",
            version=__version__,
            started=started,
            finished=_now(),
            format=fmt,
            outputs=records,
            summary=summary,
        )
        manifest_path = out_dir / f"{cfg.scenario}_manifest.json"
        manifest_path.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
        manifest.path = str(manifest_path)
    except OSError as exc:
        raise OutputError(f"cannot write outputs to {out_dir}: {exc}") from exc
    return manifest
