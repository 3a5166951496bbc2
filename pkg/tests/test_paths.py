import numpy as np
import pytest

from mcsbr import scenes
from mcsbr.emmath import transmitted_power_factor
from mcsbr.geometry import intersect
from mcsbr.paths import (
    ENTERING, EXITING, PEC, advance, branch_outcomes, classify, continue_with, init_path, interact,
    transmit_outcome, transverse_residual,
)
from mcsbr.tracing import Illumination


def _first_hit(scene, theta_deg, n=1):
    ill = Illumination.monostatic(theta_deg, 0.0)
    pts = -ill.k_inc * 10 + np.zeros((n, 3))
    state = init_path(pts, ill.k_inc, ill.tx_pols, scene.ambient, np.arange(n), scene.ambient_n)
    mask, hit = intersect(scene, state.origin, state.dir)
    return advance(state.take(mask), hit, scene), hit


def test_phase_accumulates_optical_length(glass_cube):
    state, hit = _first_hit(glass_cube, 0.0)
    # launched at z = 10 with phase -10, travelled 8.5 m in air
    assert state.phi[0] == pytest.approx(-10 + 8.5)
    inter = interact(state, hit)
    inside = continue_with(state, transmit_outcome(state, hit, inter))
    mask, hit2 = intersect(glass_cube, inside.origin, inside.dir, glass_cube.eps)
    out = advance(inside, hit2, glass_cube)
    assert out.phi[0] == pytest.approx(-1.5 + 3 * np.sqrt(1.5))
    assert classify(hit).tolist() == [ENTERING] and classify(hit2).tolist() == [EXITING]
    assert int(out.branches[0]) == 1 and int(out.bounce[0]) == 2


@pytest.mark.parametrize("theta", [0.0, 20.0, 55.0])
def test_branches_split_power_exactly(glass_cube, theta):
    state, hit = _first_hit(glass_cube, theta)
    inter = interact(state, hit)
    (r, t), = branch_outcomes(state, hit, inter)
    ci = inter.cos_i
    T = transmitted_power_factor(hit.n_incident, hit.n_transmit, ci, inter.coeffs)
    for p in range(2):
        p_in = np.sum(np.abs(state.E[0, p]) ** 2)
        p_r = np.sum(np.abs(r.new_E[p]) ** 2)
        p_t = np.sum(np.abs(t.new_E[p]) ** 2) * T[0]
        assert p_r + p_t == pytest.approx(p_in, rel=1e-12)


def test_outgoing_fields_stay_transverse(glass_cube):
    state, hit = _first_hit(glass_cube, 35.0)
    inter = interact(state, hit)
    for kind in ("reflect", "transmit"):
        o = [x for x in branch_outcomes(state, hit, inter)[0] if x.kind == kind][0]
        assert np.max(np.abs(o.new_E @ o.new_dir)) < 1e-12


def test_pec_never_transmits():
    scene = scenes.builtin_scene("pec_cube")
    state, hit = _first_hit(scene, 10.0)
    inter = interact(state, hit)
    assert classify(hit).tolist() == [PEC]
    assert len(branch_outcomes(state, hit, inter)[0]) == 1
    assert transverse_residual(state).max() < 1e-12
