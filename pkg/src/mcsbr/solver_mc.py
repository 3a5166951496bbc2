"""Monte Carlo shooting-and-bouncing-rays estimator.

Launch points are stratified over the incident aperture. Each sample
follows one branch per dielectric hit (chosen at random, with the branch
probability divided out) and may be terminated early by Russian roulette,
so every path is a single chain and the whole batch advances as one
wavefront without any branch stack.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng
from .emmath import C0, InterfaceCoefficients
from .farfield import Contribution, SweepResult, evaluate_sweep
from .geometry import LaunchRect, Scene, launch_rect
from .paths import PathState, continue_with, init_path, reflect_outcome, transmit_outcome
from .tracing import Illumination, StepCounters, surface_step

BRANCH_STRATEGIES = ("fifty_fifty", "fresnel")
P_MIN = 0.05


class ConfigError(ValueError):
    pass


@dataclass
class RouletteConfig:
    enabled: bool = False
    q: float = 0.5
    min_bounce: int = 3

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ConfigError(f"roulette.q must lie in (0, 1), got {self.q}")
        if self.min_bounce < 1:
            raise ConfigError(f"roulette.min_bounce must be >= 1, got {self.min_bounce}")


@dataclass
class McConfig:
    strata_per_wavelength: float = 10.0
    samples_per_stratum: int = 16
    branch_strategy: str = "fifty_fifty"
    roulette: RouletteConfig = field(default_factory=RouletteConfig)
    max_bounce: int = 9
    seed: int = 0
    reference_wavelength: float | None = None  # defaults to the shortest swept wavelength
    jitter: bool = True                          # False puts every sample at its cell centre
    occlusion: bool = True
    padding: float = 0.0
    chunk_rays: int = 65536
    workers: int = 1
    keep_contributions: bool = False

    def __post_init__(self):
        if isinstance(self.roulette, dict):
            self.roulette = RouletteConfig(**self.roulette)
        if not self.strata_per_wavelength > 0:
            raise ConfigError("strata_per_wavelength must be > 0")
        if self.samples_per_stratum < 1:
            raise ConfigError("samples_per_stratum must be >= 1")
        if self.branch_strategy not in BRANCH_STRATEGIES:
            raise ConfigError(f"branch_strategy must be one of {BRANCH_STRATEGIES}, got {self.branch_strategy!r}")
        if self.max_bounce < 1:
            raise ConfigError("max_bounce must be >= 1")
        if self.chunk_rays < 1 or self.workers < 1:
            raise ConfigError("chunk_rays and workers must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 bits")

    @property
    def rays_per_wavelength(self) -> float:
        """Effective density ``strata_per_wavelength * sqrt(samples_per_stratum)``."""
        return self.strata_per_wavelength * math.sqrt(self.samples_per_stratum)


@dataclass
class RunStats:
    solver: str
    rays_launched: int = 0
    rays_per_bounce: list = field(default_factory=list)
    contributions: int = 0
    peak_state_bytes: int = 0
    escaped: int = 0
    grazing_killed: int = 0
    capped: int = 0
    medium_mismatch: int = 0
    roulette_tested: list = field(default_factory=list)
    roulette_survived: list = field(default_factory=list)
    amplitude_killed: int = 0
    max_stack_depth: int = 0
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# strata


@dataclass
class StrataGrid:
    rect: LaunchRect
    nu: int
    nv: int

    @property
    def n_cells(self) -> int:
        return self.nu * self.nv

    @property
    def cell_area(self) -> float:
        return self.rect.area / self.n_cells

    @property
    def pdf_per_cell(self) -> float:
        return 1.0 / self.cell_area


def cells_for(extent: float, side: float) -> int:
    # the tolerance keeps 1/0.01-style ratios from rounding up to an extra cell
    return max(1, math.ceil(extent / side * (1.0 - 1e-12)))


def build_strata(rect: LaunchRect, wavelength: float, strata_per_wavelength: float) -> StrataGrid:
    if not wavelength > 0:
        raise ConfigError("reference wavelength must be > 0")
    side = wavelength / strata_per_wavelength
    a, b = rect.half_extents
    return StrataGrid(rect, cells_for(2 * a, side), cells_for(2 * b, side))


def sample_stratum(grid: StrataGrid, cell, sample_id, seed: int, jitter: bool = True):
    """Points uniformly distributed in their cells, and the per-cell pdf.

    Cell ``c`` covers column ``c % nu`` and row ``c // nu``. Offsets come from
    the counter-based stream keyed by the sample's global id
    (``cell * samples_per_stratum + sample``), so any worker reproduces the
    same point.
    """
    cell = np.asarray(cell, dtype=np.int64)
    iu, iv = cell % grid.nu, cell // grid.nu
    if jitter:
        ids = np.asarray(sample_id, dtype=np.uint64)
        du = rng.uniform(seed, ids, 0, rng.LAUNCH_U)
        dv = rng.uniform(seed, ids, 0, rng.LAUNCH_V)
    else:
        du = dv = np.full(cell.shape, 0.5)
    pts = grid.rect.point((iu + du) / grid.nu, (iv + dv) / grid.nv)
    return pts, np.full(cell.shape, grid.pdf_per_cell)


# ---------------------------------------------------------------------------
# branch choice and roulette


def branch_probability(coeffs: InterfaceCoefficients, strategy: str) -> np.ndarray:
    """Probability of choosing the reflected branch at a two-outcome hit."""
    if strategy == "fifty_fifty":
        return np.full(np.shape(coeffs.r_s), 0.5)
    if strategy == "fresnel":
        return np.clip(coeffs.mean_reflection, P_MIN, 1.0 - P_MIN)
    raise ConfigError(f"unknown branch strategy {strategy!r}")


def choose_branch(can_transmit, coeffs: InterfaceCoefficients, strategy: str, u):
    """Pick reflect/transmit per ray from uniforms ``u``.

    Returns ``(transmit, prob)``. Single-outcome hits (conductor, total
    internal reflection) always reflect with probability 1.
    """
    p_r = branch_probability(coeffs, strategy)
    transmit = np.asarray(can_transmit) & (np.asarray(u) >= p_r)
    prob = np.where(can_transmit, np.where(transmit, 1.0 - p_r, p_r), 1.0)
    return transmit, prob


def roulette_step(bounce, weight, cfg: RouletteConfig, u):
    """Russian roulette: returns ``(survive, new_weight)``.

    Paths that have made fewer than ``min_bounce`` hits always continue.
    """
    bounce = np.asarray(bounce)
    weight = np.asarray(weight, dtype=float)
    if not cfg.enabled:
        return np.ones(bounce.shape, bool), weight
    tested = bounce >= cfg.min_bounce
    survive = ~tested | (np.asarray(u) >= cfg.q)
    return survive, np.where(tested, weight / (1.0 - cfg.q), weight)


# ---------------------------------------------------------------------------
# estimator


def reference_wavelength(frequencies, override=None) -> float:
    return float(override) if override else C0 / float(np.max(frequencies))


@dataclass
class _Chunk:
    values: np.ndarray
    counters: StepCounters
    capped: int
    roulette_tested: list
    roulette_survived: list
    peak_bytes: int
    contributions: Contribution | None


def _bump(lst: list, idx: int, n: int) -> None:
    while len(lst) <= idx:
        lst.append(0)
    lst[idx] += n


def _run_chunk(scene, illum, freqs, cfg: McConfig, grid: StrataGrid, start: int, stop: int) -> _Chunk:
    spp = cfg.samples_per_stratum
    ids = np.arange(start, stop, dtype=np.uint64)
    cells = (ids // np.uint64(spp)).astype(np.int64)
    pts, _ = sample_stratum(grid, cells, ids, cfg.seed, cfg.jitter)
    pdf_area = spp * grid.pdf_per_cell
    state = init_path(pts, illum.k_inc, illum.tx_pols, scene.ambient, ids, scene.ambient_n)

    counters = StepCounters()
    tested, survived = [], []
    capped = 0
    peak = state.nbytes
    parts = []
    while len(state):
        state, hit, inter, contrib = surface_step(scene, state, illum, pdf_area, cfg.occlusion, counters)
        if contrib is not None:
            parts.append(contrib)
        if not len(state):
            break
        live = state.bounce < cfg.max_bounce
        capped += int(np.count_nonzero(~live))
        if not np.all(live):
            state, hit, inter = state.take(live), hit.take(live), inter.take(live)
        if not len(state):
            break
        bounce = int(state.bounce[0])

        u = rng.uniform(cfg.seed, state.ray_id, bounce, rng.BRANCH)
        transmit, prob = choose_branch(inter.can_transmit, inter.coeffs, cfg.branch_strategy, u)
        children = []
        for take_t, make in ((False, reflect_outcome), (True, transmit_outcome)):
            sel = transmit if take_t else ~transmit
            if np.any(sel):
                sub_state, sub_hit, sub_inter = state.take(sel), hit.take(sel), inter.take(sel)
                children.append(continue_with(sub_state, make(sub_state, sub_hit, sub_inter), prob[sel]))
        state = PathState.concat(children)

        if cfg.roulette.enabled and bounce >= cfg.roulette.min_bounce:
            u = rng.uniform(cfg.seed, state.ray_id, bounce, rng.ROULETTE)
            keep, w = roulette_step(state.bounce, state.weight, cfg.roulette, u)
            state.weight = w
            _bump(tested, bounce, len(state))
            _bump(survived, bounce, int(np.count_nonzero(keep)))
            state = state.take(keep)
        peak = max(peak, state.nbytes)

    contrib = Contribution.concat(parts)
    values = evaluate_sweep(contrib, freqs, illum.k_scatter, illum.rx_pols).values
    return _Chunk(values, counters, capped, tested, survived, peak,
                  contrib if cfg.keep_contributions else None)


def estimate(scene: Scene, illum: Illumination, frequencies, config: McConfig | None = None):
    """Monte Carlo sweep.

    Returns ``(SweepResult, RunStats, contributions)``; ``contributions`` is
    ``None`` unless ``config.keep_contributions`` is set.
    """
    cfg = config or McConfig()
    t0 = time.perf_counter()
    freqs = np.asarray(frequencies, dtype=float)
    rect = launch_rect(scene, illum.k_inc, cfg.padding)
    grid = build_strata(rect, reference_wavelength(freqs, cfg.reference_wavelength), cfg.strata_per_wavelength)
    total = grid.n_cells * cfg.samples_per_stratum
    bounds = [(s, min(s + cfg.chunk_rays, total)) for s in range(0, total, cfg.chunk_rays)]

    def work(b):
        return _run_chunk(scene, illum, freqs, cfg, grid, *b)

    if cfg.workers == 1:
        chunks = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(work, bounds))

    stats = RunStats(solver="mc", rays_launched=total)
    counters = StepCounters()
    values = np.zeros((len(freqs), len(illum.rx_pols), len(illum.tx_pols)), complex)
    for ch in chunks:  # fixed order keeps the sum independent of scheduling
        values = values + ch.values
        counters.merge(ch.counters)
        stats.capped += ch.capped
        for b, n in enumerate(ch.roulette_tested):
            _bump(stats.roulette_tested, b, n)
        for b, n in enumerate(ch.roulette_survived):
            _bump(stats.roulette_survived, b, n)
        stats.peak_state_bytes = max(stats.peak_state_bytes, ch.peak_bytes)
    stats.peak_state_bytes *= min(cfg.workers, len(chunks))
    stats.rays_per_bounce = counters.traced
    stats.contributions = counters.contributions
    stats.escaped = counters.escaped
    stats.grazing_killed = counters.grazing_killed
    stats.medium_mismatch = counters.medium_mismatch
    stats.wall_time_s = time.perf_counter() - t0

    meta = {"solver": "mc", "seed": int(cfg.seed), "rays": total, "strata": [grid.nu, grid.nv],
            "samples_per_stratum": cfg.samples_per_stratum}
    contribs = Contribution.concat([c.contributions for c in chunks]) if cfg.keep_contributions else None
    return SweepResult(freqs, values, meta), stats, contribs
