"""Command-line front end: ``mcsbr <command> --config FILE [--seed N] [--workers N] [--out DIR]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numba
import numpy as np
import yaml

from . import __version__, oracles, radar
from .config import ConfigError, ExperimentConfig, load_config
from .emmath import C0
from .farfield import AngleSweepResult, SweepResult
from .geometry import SceneError
from .scenes import SCENE_NAMES, write_builtin
from .solver_det import solve
from .solver_mc import ConfigError as SolverConfigError
from .solver_mc import RunStats, estimate

log = logging.getLogger("mcsbr")

COMMANDS = ("sweep", "angle-sweep", "range-profile", "isar", "convergence", "bench", "oracle", "scenes")


class Run:
    """Artifact writer for one command invocation."""

    def __init__(self, command: str, cfg: ExperimentConfig | None, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        out.mkdir(parents=True, exist_ok=True)
        self.config_hash = cfg.config_hash() if cfg else None
        self.artifacts: list[str] = []
        self.stats: list[dict] = []
        self.t0 = time.perf_counter()

    @property
    def seed(self) -> int:
        return int(self.cfg.mc.seed) if self.cfg else 0

    @property
    def header(self) -> str:
        return f"mcsbr config_sha256={self.config_hash} seed={self.seed}"

    def path(self, name: str) -> Path:
        p = self.out / name
        p.parent.mkdir(parents=True, exist_ok=True)
        self.artifacts.append(str(p.relative_to(self.out)))
        return p

    def add_stats(self, label: str, stats: RunStats) -> None:
        self.stats.append({"label": label, **stats.to_dict()})

    def finish(self, extra: dict | None = None) -> None:
        manifest = {
            "command": self.command,
            "config_sha256": self.config_hash,
            "seed": self.seed,
            "config": self.cfg.to_dict() if self.cfg else None,
            "versions": {
                "mcsbr": __version__, "python": platform.python_version(),
                "numpy": np.__version__, "numba": numba.__version__, "pyyaml": yaml.__version__,
            },
            "artifacts": self.artifacts,
            "run_stats": self.stats,
            "wall_time_s": time.perf_counter() - self.t0,
        }
        if extra:
            manifest.update(extra)
        name = self.cfg.outputs.manifest_json if self.cfg else "manifest.json"
        (self.out / name).write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _solve(cfg: ExperimentConfig, scene, illum, freqs, solver: str | None = None, **overrides):
    solver = solver or cfg.solver
    if solver == "mc":
        return estimate(scene, illum, freqs, dataclasses.replace(cfg.mc, **overrides))
    return solve(scene, illum, freqs, dataclasses.replace(cfg.deterministic, **overrides))


def _angle_illum(cfg: ExperimentConfig, axis: str, angle: float):
    if axis == "theta":
        return cfg.illumination(theta_deg=angle)
    return cfg.illumination(phi_deg=angle)


# ---------------------------------------------------------------------------
# commands


def cmd_sweep(cfg: ExperimentConfig, run: Run) -> SweepResult:
    scene = cfg.load_scene()
    res, stats, _ = _solve(cfg, scene, cfg.illumination(), cfg.frequency.grid())
    res.to_csv(run.path(cfg.outputs.sweep_csv), run.header)
    run.add_stats(cfg.solver, stats)
    return res


def cmd_angle_sweep(cfg: ExperimentConfig, run: Run, solver: str | None = None, **overrides) -> AngleSweepResult:
    a = cfg.angle_sweep
    scene = cfg.load_scene()
    angles = a.grid()
    values = np.zeros((len(angles), 2, 2), complex)
    for i, ang in enumerate(angles):
        res, stats, _ = _solve(cfg, scene, _angle_illum(cfg, a.axis, ang), [a.frequency_hz], solver, **overrides)
        values[i] = res.values[0]
        run.add_stats(f"{solver or cfg.solver}@{a.axis}={ang:g}", stats)
    return AngleSweepResult(angles, a.frequency_hz, values, a.axis)


def cmd_range_profile(cfg: ExperimentConfig, run: Run):
    res = cmd_sweep(cfg, run)
    p = cfg.range_profile
    prof = radar.range_profile(res, p.pol, p.window, p.zero_pad)
    prof.to_csv(run.path(cfg.outputs.profile_csv), run.header)
    return prof


def isar_sweeps(cfg: ExperimentConfig, solver: str | None = None, run: Run | None = None):
    scene = cfg.load_scene()
    angles = np.linspace(cfg.isar.start_deg, cfg.isar.stop_deg, cfg.isar.count)
    freqs = cfg.frequency.grid()
    sweeps = []
    for ang in angles:
        res, stats, _ = _solve(cfg, scene, cfg.illumination(phi_deg=ang), freqs, solver)
        sweeps.append(res)
        if run is not None:
            run.add_stats(f"{solver or cfg.solver}@phi={ang:g}", stats)
    return angles, sweeps


def cmd_isar(cfg: ExperimentConfig, run: Run):
    angles, sweeps = isar_sweeps(cfg, run=run)
    i = cfg.isar
    img = radar.isar(sweeps, angles, i.pol, i.window, i.floor_db, i.zero_pad)
    img.to_csv(run.path(cfg.outputs.isar_csv), run.header)
    img.to_pgm(run.path(cfg.outputs.isar_pgm), run.header)
    # raw frequency x angle matrix for re-imaging
    rx, tx = i.pol[0], i.pol[-1]
    lines = [f"# {run.header}", "angle_deg,frequency_hz,re,im"]
    for ang, s in zip(angles, sweeps):
        for f, v in zip(s.frequencies, s.pol(rx, tx)):
            lines.append(f"{ang:.17g},{f:.17g},{v.real:.17g},{v.imag:.17g}")
    run.path("isar_matrix.csv").write_text("\n".join(lines) + "\n")
    return img


def db_error(values, reference) -> float:
    """Mean squared difference in dB between two complex response arrays."""
    a = 20 * np.log10(np.maximum(np.abs(values), 1e-300))
    b = 20 * np.log10(np.maximum(np.abs(reference), 1e-300))
    return float(np.mean((a - b) ** 2))


def cmd_convergence(cfg: ExperimentConfig, run: Run):
    """Error tables of MC runs against a dense deterministic reference.

    Uses the angle sweep when ``angle_sweep.count > 1``, otherwise the
    frequency sweep. Every run's sweep is written next to the table.
    """
    c = cfg.convergence
    use_angles = cfg.angle_sweep.count > 1
    pol = cfg.source.polarization

    def run_one(solver, **over):
        if use_angles:
            r = cmd_angle_sweep(cfg, run, solver, **over)
            return r, r.pol(pol)
        scene = cfg.load_scene()
        r, stats, _ = _solve(cfg, scene, cfg.illumination(), cfg.frequency.grid(), solver, **over)
        run.add_stats(solver, stats)
        return r, r.pol(pol)

    ref, ref_v = run_one("deterministic", rays_per_wavelength=c.reference_rays_per_wavelength)
    ref.to_csv(run.path("convergence/reference.csv"), run.header)
    rows = ["strata_per_wavelength,samples_per_stratum,rays_per_wavelength,seed,mse_db2,sweep_csv"]
    for d in c.strata_per_wavelength:
        for spp in c.samples_per_stratum:
            for k in range(c.seeds):
                seed = int(cfg.mc.seed) + k
                r, v = run_one("mc", strata_per_wavelength=float(d), samples_per_stratum=int(spp), seed=seed)
                name = f"convergence/mc_d{d:g}_spp{spp}_seed{seed}.csv"
                r.to_csv(run.path(name), f"mcsbr config_sha256={run.config_hash} seed={seed}")
                rows.append(f"{d:.17g},{spp},{d * np.sqrt(spp):.17g},{seed},{db_error(v, ref_v):.17g},{name}")
    table = run.path("convergence/errors.csv")
    table.write_text(f"# {run.header}\n" + "\n".join(rows) + "\n")
    return table


def cmd_bench(cfg: ExperimentConfig, run: Run):
    """Paired MC / deterministic runs: deterministic work counters go to CSV, timings to JSON."""
    b = cfg.bench
    scene = cfg.load_scene()
    illum = cfg.illumination()
    freqs = [cfg.frequency.stop_hz]
    rows = ["solver,max_bounce,rays_launched,rays_traced,contributions,peak_state_bytes,max_stack_depth"]
    timing = []
    for mb in b.max_bounce:
        jobs = {
            "mc": lambda: _solve(cfg, scene, illum, freqs, "mc", max_bounce=mb,
                                 strata_per_wavelength=b.mc_strata_per_wavelength,
                                 samples_per_stratum=b.mc_samples_per_stratum),
            "deterministic": lambda: _solve(cfg, scene, illum, freqs, "deterministic", max_bounce=mb,
                                            rays_per_wavelength=b.det_rays_per_wavelength,
                                            force_stack_accounting=b.force_stack_accounting),
        }
        for name, job in jobs.items():
            for _ in range(b.warmups):
                job()
            times = []
            for _ in range(b.repeats):
                t = time.perf_counter()
                _, stats, _ = job()
                times.append(time.perf_counter() - t)
            run.add_stats(f"bench:{name}:max_bounce={mb}", stats)
            rows.append(f"{name},{mb},{stats.rays_launched},{sum(stats.rays_per_bounce)},"
                        f"{stats.contributions},{stats.peak_state_bytes},{stats.max_stack_depth}")
            timing.append({"solver": name, "max_bounce": mb, "repeats": b.repeats, "warmups": b.warmups,
                           "wall_time_s_mean": float(np.mean(times)), "wall_time_s": times,
                           "peak_state_bytes": stats.peak_state_bytes})
    run.path("bench.csv").write_text(f"# {run.header}\n" + "\n".join(rows) + "\n")
    run.path("bench_timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    return rows, timing


def cmd_oracle(cfg: ExperimentConfig, run: Run):
    o = cfg.oracle
    freqs = cfg.frequency.grid()
    if o.kind == "slab":
        stack = oracles.LayerStack(tuple((float(n), float(d)) for n, d in o.layers))
        lines = ["frequency_hz,re_r,im_r,mag_db"]
        for f in freqs:
            r = oracles.slab_reflection(stack, f, o.pec_backed)
            lines.append(f"{f:.17g},{r.real:.17g},{r.imag:.17g},{20 * np.log10(max(abs(r), 1e-300)):.17g}")
    else:
        lines = ["frequency_hz,sigma_m2,sigma_dbsm"]
        for f in freqs:
            s = (oracles.plate_rcs(o.plate_a_m, o.plate_b_m, C0 / f) if o.kind == "plate"
                 else oracles.sphere_go_rcs(o.sphere_radius_m))
            lines.append(f"{f:.17g},{s:.17g},{10 * np.log10(s):.17g}")
    path = run.path(f"oracle_{o.kind}.csv")
    path.write_text(f"# {run.header}\n" + "\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcsbr", description="Monte Carlo and deterministic SBR scattering solver")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="experiment YAML file (all commands except scenes)")
    p.add_argument("--seed", type=int, help="override mc.seed")
    p.add_argument("--workers", type=int, help="worker threads for the solvers")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--name", action="append", help="scenes: builtin scene name (repeatable; default all)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    out = Path(args.out)
    try:
        if args.command == "scenes":
            names = args.name or list(SCENE_NAMES)
            for n in names:
                if n not in SCENE_NAMES:
                    raise SceneError(f"unknown builtin scene {n!r}")
                mesh, mats = write_builtin(n, out)
                log.info("wrote %s, %s", mesh, mats)
            return 0
        if not args.config:
            raise ConfigError("--config: required for this command")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.mc = dataclasses.replace(cfg.mc, seed=args.seed)
        if args.workers is not None:
            cfg.mc = dataclasses.replace(cfg.mc, workers=args.workers)
            cfg.deterministic = dataclasses.replace(cfg.deterministic, workers=args.workers)
        run = Run(args.command, cfg, out)
        if args.command == "sweep":
            cmd_sweep(cfg, run)
        elif args.command == "angle-sweep":
            res = cmd_angle_sweep(cfg, run)
            res.to_csv(run.path(cfg.outputs.angle_sweep_csv), run.header)
        elif args.command == "range-profile":
            cmd_range_profile(cfg, run)
        elif args.command == "isar":
            cmd_isar(cfg, run)
        elif args.command == "convergence":
            cmd_convergence(cfg, run)
        elif args.command == "bench":
            cmd_bench(cfg, run)
        elif args.command == "oracle":
            cmd_oracle(cfg, run)
        (out / cfg.outputs.stats_json).write_text(json.dumps(run.stats, indent=2, default=_json_default) + "\n")
        run.finish()
        log.info("artifacts in %s", out)
        return 0
    except (ConfigError, SolverConfigError, SceneError, radar.GridError, OSError) as exc:
        print(f"mcsbr: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
