"""Deterministic shooting-and-bouncing-rays baseline.

Rays start at the centres of a regular launch grid and every dielectric
hit spawns both a reflected and a transmitted ray. The tree is walked
depth-first: the reflected rays continue as the current wavefront while
a junction record (the rays and their hits) waits on an explicit stack
until the deeper subtree is finished. The stack's byte count is the memory
cost that the Monte Carlo solver avoids.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .farfield import Contribution, SweepResult, evaluate_sweep
from .geometry import Hit, Scene, launch_rect
from .paths import PathState, continue_with, init_path, interact, reflect_outcome, transmit_outcome
from .solver_mc import ConfigError, RunStats, build_strata, reference_wavelength, sample_stratum
from .tracing import Illumination, StepCounters, surface_step


@dataclass
class DetConfig:
    rays_per_wavelength: float = 20.0
    max_bounce: int = 9
    amplitude_cutoff: float = 0.0
    force_stack_accounting: bool = False
    reference_wavelength: float | None = None
    occlusion: bool = True
    padding: float = 0.0
    batch_rays: int = 65536
    workers: int = 1
    keep_contributions: bool = False

    def __post_init__(self):
        if not self.rays_per_wavelength > 0:
            raise ConfigError("rays_per_wavelength must be > 0")
        if self.max_bounce < 1:
            raise ConfigError("max_bounce must be >= 1")
        if self.amplitude_cutoff < 0:
            raise ConfigError("amplitude_cutoff must be >= 0")
        if self.batch_rays < 1 or self.workers < 1:
            raise ConfigError("batch_rays and workers must be >= 1")


@dataclass
class Junction:
    """Rays waiting for their transmitted branch, with the hits that spawned them."""

    state: PathState
    hit: Hit
    charged_bytes: int


class BranchStack:
    """LIFO of junction records with a byte counter tracking the peak."""

    def __init__(self):
        self.records: list[Junction] = []
        self.bytes = 0
        self.peak_bytes = 0
        self.max_depth = 0

    def push(self, rec: Junction) -> None:
        self.records.append(rec)
        self.bytes += rec.charged_bytes
        self.max_depth = max(self.max_depth, len(self.records))

    def pop(self) -> Junction:
        rec = self.records.pop()
        self.bytes -= rec.charged_bytes
        return rec

    def observe(self, live_bytes: int) -> None:
        self.peak_bytes = max(self.peak_bytes, self.bytes + live_bytes)

    def __len__(self) -> int:
        return len(self.records)


def _amplitude_ok(state: PathState, cutoff: float) -> np.ndarray:
    if cutoff <= 0:
        return np.ones(len(state), bool)
    return np.max(np.sqrt(np.sum(np.abs(state.E) ** 2, axis=-1)), axis=-1) >= cutoff


def _run_batch(scene, illum, freqs, cfg: DetConfig, grid, start, stop):
    cells = np.arange(start, stop, dtype=np.int64)
    pts, _ = sample_stratum(grid, cells, cells.astype(np.uint64), 0, jitter=False)
    pdf_area = grid.pdf_per_cell
    wave = init_path(pts, illum.k_inc, illum.tx_pols, scene.ambient, cells.astype(np.uint64), scene.ambient_n)

    counters = StepCounters()
    stack = BranchStack()
    stack.observe(wave.nbytes)
    capped = amp_killed = 0
    parts = []
    while True:
        if not len(wave):
            if not len(stack):
                break
            rec = stack.pop()
            if not len(rec.state):
                continue
            inter = interact(rec.state, rec.hit)
            wave = continue_with(rec.state, transmit_outcome(rec.state, rec.hit, inter))
            ok = _amplitude_ok(wave, cfg.amplitude_cutoff)
            amp_killed += int(np.count_nonzero(~ok))
            wave = wave.take(ok)
            stack.observe(wave.nbytes)
            continue

        state, hit, inter, contrib = surface_step(scene, wave, illum, pdf_area, cfg.occlusion, counters)
        if contrib is not None:
            parts.append(contrib)
        live = state.bounce < cfg.max_bounce
        capped += int(np.count_nonzero(~live))
        state, hit, inter = state.take(live), hit.take(live), inter.take(live)

        junction = inter.can_transmit
        pending_state, pending_hit = state.take(junction), hit.take(junction)
        if cfg.force_stack_accounting:
            # charge a record for every ray at this depth, as a copy-everything
            # implementation would, even where no transmitted branch exists
            charged = state.nbytes + hit.nbytes
        else:
            charged = pending_state.nbytes + pending_hit.nbytes
        if len(pending_state) or cfg.force_stack_accounting:
            stack.push(Junction(pending_state, pending_hit, charged))

        wave = continue_with(state, reflect_outcome(state, hit, inter)) if len(state) else state
        ok = _amplitude_ok(wave, cfg.amplitude_cutoff)
        amp_killed += int(np.count_nonzero(~ok))
        wave = wave.take(ok)
        stack.observe(wave.nbytes)

    contrib = Contribution.concat(parts)
    values = evaluate_sweep(contrib, freqs, illum.k_scatter, illum.rx_pols).values
    return values, counters, capped, amp_killed, stack, (contrib if cfg.keep_contributions else None)


def solve(scene: Scene, illum: Illumination, frequencies, config: DetConfig | None = None):
    """Deterministic sweep. Returns ``(SweepResult, RunStats, contributions)``."""
    cfg = config or DetConfig()
    t0 = time.perf_counter()
    freqs = np.asarray(frequencies, dtype=float)
    rect = launch_rect(scene, illum.k_inc, cfg.padding)
    grid = build_strata(rect, reference_wavelength(freqs, cfg.reference_wavelength), cfg.rays_per_wavelength)
    total = grid.n_cells
    bounds = [(s, min(s + cfg.batch_rays, total)) for s in range(0, total, cfg.batch_rays)]

    def work(b):
        return _run_batch(scene, illum, freqs, cfg, grid, *b)

    if cfg.workers == 1:
        batches = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(cfg.workers) as pool:
            batches = list(pool.map(work, bounds))

    stats = RunStats(solver="deterministic", rays_launched=total)
    counters = StepCounters()
    values = np.zeros((len(freqs), len(illum.rx_pols), len(illum.tx_pols)), complex)
    for vals, cnt, capped, amp_killed, stack, _ in batches:
        values = values + vals
        counters.merge(cnt)
        stats.capped += capped
        stats.amplitude_killed += amp_killed
        stats.peak_state_bytes = max(stats.peak_state_bytes, stack.peak_bytes)
        stats.max_stack_depth = max(stats.max_stack_depth, stack.max_depth)
    stats.peak_state_bytes *= min(cfg.workers, len(batches))
    stats.rays_per_bounce = counters.traced
    stats.contributions = counters.contributions
    stats.escaped = counters.escaped
    stats.grazing_killed = counters.grazing_killed
    stats.medium_mismatch = counters.medium_mismatch
    stats.wall_time_s = time.perf_counter() - t0

    meta = {"solver": "deterministic", "rays": total, "grid": [grid.nu, grid.nv]}
    contribs = Contribution.concat([b[5] for b in batches]) if cfg.keep_contributions else None
    return SweepResult(freqs, values, meta), stats, contribs
