import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layered import central_ray, layered_scene, layered_stack, same_paths, solver_paths
from mcsbr import scenes
from mcsbr.emmath import fresnel
from mcsbr.geometry import launch_rect
from mcsbr.oracles import enumerate_layered_paths, plate_rcs
from mcsbr.solver_det import BranchStack, DetConfig, Junction, solve
from mcsbr.solver_mc import (
    ConfigError, McConfig, RouletteConfig, build_strata, cells_for, choose_branch, estimate,
    roulette_step, sample_stratum,
)
from mcsbr.tracing import Illumination


@given(st.floats(0.01, 100), st.floats(0.001, 1))
def test_cells_cover_extent(extent, side):
    n = cells_for(extent, side)
    assert n * side >= extent * (1 - 1e-9)
    assert (n - 1) * side < extent


def test_jittered_samples_stay_in_their_cell(glass_cube):
    ill = Illumination.monostatic(30, 40)
    grid = build_strata(launch_rect(glass_cube, ill.k_inc), 0.1, 5)
    cells = np.arange(grid.n_cells)
    pts, _ = sample_stratum(grid, cells, cells.astype(np.uint64), 3, jitter=True)
    rel = pts - grid.rect.center
    u = (rel @ grid.rect.u_axis + grid.rect.half_extents[0]) / (2 * grid.rect.half_extents[0]) * grid.nu
    v = (rel @ grid.rect.v_axis + grid.rect.half_extents[1]) / (2 * grid.rect.half_extents[1]) * grid.nv
    assert np.array_equal(np.floor(u).astype(int) * grid.nv + np.floor(v).astype(int), cells) or \
        np.array_equal(np.floor(v).astype(int) * grid.nu + np.floor(u).astype(int), cells)


@given(st.floats(1e-3, 0.999), st.sampled_from(["fifty_fifty", "fresnel"]))
@settings(max_examples=25)
def test_branch_choice_is_unbiased(ci, strategy):
    c = fresnel(np.full(50_000, 1.0), 1.5, ci)
    u = np.random.default_rng(0).random(50_000)
    transmit, prob = choose_branch(np.ones(50_000, bool), c, strategy, u)
    # E[1{branch}/prob] = 1 for each branch
    assert abs(np.mean(transmit / prob) - 1) < 0.05
    assert abs(np.mean(~transmit / prob) - 1) < 0.05


def test_roulette_keeps_expected_weight():
    cfg = RouletteConfig(enabled=True, q=0.3, min_bounce=2)
    u = np.random.default_rng(1).random(200_000)
    survive, w = roulette_step(np.full(200_000, 5), np.ones(200_000), cfg, u)
    assert abs(np.mean(survive * w) - 1) < 0.01
    survive, w = roulette_step(np.ones(10), np.ones(10), cfg, np.zeros(10))
    assert survive.all() and np.all(w == 1)


def test_config_validation():
    with pytest.raises(ConfigError):
        McConfig(branch_strategy="greedy")
    with pytest.raises(ConfigError):
        McConfig(samples_per_stratum=0)
    with pytest.raises(ConfigError):
        DetConfig(max_bounce=0)


def test_mc_without_jitter_reproduces_deterministic_contributions():
    scene = scenes.builtin_scene("dihedral")
    ill = Illumination.monostatic(30, 0)
    freqs = np.linspace(2e9, 3e9, 5)
    mc = McConfig(strata_per_wavelength=8, samples_per_stratum=1, jitter=False, keep_contributions=True, max_bounce=4)
    det = DetConfig(rays_per_wavelength=8, keep_contributions=True, max_bounce=4)
    r1, _, c1 = estimate(scene, ill, freqs, mc)
    r2, _, c2 = solve(scene, ill, freqs, det)
    a, b = c1.sorted(), c2.sorted()
    assert len(a) == len(b) > 0
    for name in ("A_J", "A_M", "phi", "exit_point", "bounce", "ray_id", "branches"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name
    assert np.allclose(r1.values, r2.values, rtol=1e-12, atol=1e-15)


def test_deterministic_tree_matches_layered_enumeration():
    scene = layered_scene()
    ill = Illumination.monostatic(0, 0)
    cfg = DetConfig(rays_per_wavelength=1, max_bounce=7, keep_contributions=True, reference_wavelength=1.0)
    _, _, contrib = solve(scene, ill, [1e9], cfg)
    got = solver_paths(contrib, ill, 1.0, central_ray(contrib))
    want = enumerate_layered_paths(layered_stack(), 7)
    assert len(got) == len(want) > 5
    assert same_paths(got, want)


def test_plate_broadside_po(plate_scene):
    ill = Illumination.monostatic(0, 0)
    res, stats, _ = solve(plate_scene, ill, [2.99792458e9], DetConfig(rays_per_wavelength=10))
    expect = 10 * np.log10(plate_rcs(1, 1, 0.1))
    assert abs(res.rcs_dbsm()[0] - expect) < 0.05
    assert abs(res.rcs_dbsm("H")[0] - expect) < 0.05
    assert abs(res.pol("V", "H")[0]) < 1e-9 * abs(res.pol("V")[0])


def test_worker_count_does_not_change_results(glass_cube):
    ill = Illumination.monostatic(10, 20)
    f = np.linspace(1e9, 2e9, 7)
    base = McConfig(strata_per_wavelength=3, samples_per_stratum=2, chunk_rays=3000, seed=5)
    r1, s1, _ = estimate(glass_cube, ill, f, base)
    base.workers = 3
    r3, s3, _ = estimate(glass_cube, ill, f, base)
    assert np.array_equal(r1.values, r3.values)
    assert s1.rays_per_bounce == s3.rays_per_bounce
    d1, _, _ = solve(glass_cube, ill, f, DetConfig(rays_per_wavelength=3, batch_rays=3000))
    d3, _, _ = solve(glass_cube, ill, f, DetConfig(rays_per_wavelength=3, batch_rays=3000, workers=3))
    assert np.array_equal(d1.values, d3.values)


def test_monostatic_reciprocity(glass_cube):
    ill = Illumination.monostatic(25, 10)
    res, _, _ = solve(glass_cube, ill, [1.5e9], DetConfig(rays_per_wavelength=4))
    vh, hv = res.pol("V", "H")[0], res.pol("H", "V")[0]
    assert abs(vh - hv) < 0.05 * max(abs(res.pol("V")[0]), 1e-12)


def test_branch_stack_tracks_peak():
    st_ = BranchStack()
    st_.push(Junction(None, None, 100))
    st_.observe(50)
    st_.push(Junction(None, None, 10))
    st_.pop()
    st_.pop()
    st_.observe(0)
    assert st_.peak_bytes == 150 and st_.max_depth == 2 and len(st_) == 0
