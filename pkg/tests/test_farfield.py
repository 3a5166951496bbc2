import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsbr.emmath import C0
from mcsbr.farfield import Contribution, SweepResult, evaluate_sweep, pol_vectors, radar_direction

finite = st.floats(-5, 5)


def _random_contrib(rng, n=20):
    c = lambda: rng.normal(size=(n, 2, 3)) + 1j * rng.normal(size=(n, 2, 3))
    return Contribution(
        A_J=c(), A_M=c(), phi=rng.normal(size=n) * 3, exit_point=rng.normal(size=(n, 3)),
        bounce=np.ones(n, np.int64), ray_id=np.arange(n, dtype=np.uint64), branches=np.zeros(n, np.uint64))


def _eval(c, freqs, theta=20.0, phi=30.0):
    return evaluate_sweep(c, freqs, radar_direction(theta, phi), pol_vectors(theta, phi)).values


@given(st.integers(0, 2**31), finite, finite)
@settings(max_examples=25, deadline=None)
def test_sweep_is_linear_in_currents(seed, a, b):
    rng = np.random.default_rng(seed)
    c1, c2 = _random_contrib(rng), _random_contrib(rng)
    mix = Contribution(A_J=a * c1.A_J + b * c2.A_J, A_M=a * c1.A_M + b * c2.A_M, phi=c1.phi,
                       exit_point=c1.exit_point, bounce=c1.bounce, ray_id=c1.ray_id, branches=c1.branches)
    c2b = Contribution(A_J=c2.A_J, A_M=c2.A_M, phi=c1.phi, exit_point=c1.exit_point,
                       bounce=c1.bounce, ray_id=c1.ray_id, branches=c1.branches)
    f = np.linspace(1e9, 2e9, 4)
    assert np.allclose(_eval(mix, f), a * _eval(c1, f) + b * _eval(c2b, f), atol=1e-9)


def test_frequency_batches_are_independent(rng):
    c = _random_contrib(rng)
    f = np.linspace(1e9, 3e9, 9)
    whole = _eval(c, f)
    parts = np.concatenate([_eval(c, f[:4]), _eval(c, f[4:])])
    assert np.array_equal(whole, parts)


@given(st.floats(-3, 3))
@settings(max_examples=20, deadline=None)
def test_path_length_shift_is_a_phase_ramp(dl):
    rng = np.random.default_rng(3)
    c = _random_contrib(rng)
    f = np.linspace(1e9, 3e9, 5)
    shifted = Contribution(A_J=c.A_J, A_M=c.A_M, phi=c.phi + dl, exit_point=c.exit_point,
                           bounce=c.bounce, ray_id=c.ray_id, branches=c.branches)
    ramp = np.exp(-2j * np.pi * f / C0 * dl)[:, None, None]
    assert np.allclose(_eval(shifted, f), _eval(c, f) * ramp, atol=1e-9)


def test_empty_contribution_gives_zeros():
    res = evaluate_sweep(Contribution.empty(), [1e9, 2e9], radar_direction(0, 0), pol_vectors(0, 0))
    assert np.all(res.values == 0) and res.metadata["empty"]


def test_csv_round_trip_is_exact(tmp_path, rng):
    v = rng.normal(size=(6, 2, 2)) + 1j * rng.normal(size=(6, 2, 2))
    res = SweepResult(np.linspace(1e9, 2e9, 6), v)
    p = tmp_path / "s.csv"
    res.to_csv(p, header="mcsbr test")
    back = SweepResult.from_csv(p)
    assert np.array_equal(back.values, v) and np.array_equal(back.frequencies, res.frequencies)
    assert p.read_text().splitlines()[1].startswith("frequency_hz,re_vv,im_vv,re_hh")


def test_polarization_basis_is_orthonormal_and_transverse():
    for th, ph in [(0, 0), (37, 120), (90, 270), (180, 10)]:
        r = radar_direction(th, ph)
        v, h = pol_vectors(th, ph)
        m = np.stack([v, h, r])
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
