import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsbr.emmath import C0
from mcsbr.farfield import SweepResult
from mcsbr.radar import GridError, axis_transform, cross_range_resolution, isar, range_profile


def _point_sweep(freqs, ranges, amps=None):
    amps = np.ones(len(ranges)) if amps is None else amps
    k = 2 * np.pi * freqs / C0
    v = sum(a * np.exp(2j * k * r) for a, r in zip(amps, ranges))
    values = np.zeros((len(freqs), 2, 2), complex)
    values[:, 0, 0] = values[:, 1, 1] = v
    return SweepResult(freqs, values)


@given(st.floats(-3.0, 3.0))
@settings(max_examples=25, deadline=None)
def test_point_scatterer_lands_within_one_bin(r):
    f = np.linspace(2e9, 3e9, 101)
    prof = range_profile(_point_sweep(f, [r]))
    peak = prof.ranges_m[np.argmax(prof.magnitude_db)]
    assert abs(peak - r) <= prof.bin_spacing


def test_unit_scatterer_on_a_bin_has_unit_peak():
    f = np.linspace(1e9, 2e9, 64)
    prof = range_profile(_point_sweep(f, [0.0]))
    assert prof.magnitude_db.max() == pytest.approx(0.0, abs=1e-9)


def test_parseval_without_window(rng):
    v = rng.normal(size=32) + 1j * rng.normal(size=32)
    _, spec = axis_transform(v, 1e6, window="none", zero_pad=1)
    # rectangular window: spectrum is the plain inverse DFT
    assert np.sum(np.abs(spec) ** 2) == pytest.approx(np.sum(np.abs(v) ** 2) / 32)


def test_two_scatterers_resolved():
    f = np.linspace(1e9, 3e9, 201)
    prof = range_profile(_point_sweep(f, [1.0, -1.5], [1.0, 0.5]))
    p = prof.peaks(2, min_separation_m=0.5)
    assert abs(p[0] - 1.0) <= prof.bin_spacing and abs(p[1] + 1.5) <= prof.bin_spacing


def test_nonuniform_grid_rejected():
    f = np.array([1e9, 1.1e9, 1.3e9])
    with pytest.raises(GridError):
        range_profile(_point_sweep(f, [0.0]))


def test_isar_places_point_scatterer():
    f = np.linspace(2e9, 3e9, 64)
    angles = np.linspace(-10, 10, 41)
    x, y = 1.0, 0.8  # down-range, cross-range at the aperture centre
    sweeps = []
    for a in np.radians(angles):
        r = x * np.cos(a) + y * np.sin(a)
        sweeps.append(_point_sweep(f, [r]))
    img = isar(sweeps, angles)
    d, c = img.peak_positions(1)[0]
    assert abs(d - x) <= img.down_range_m[1] - img.down_range_m[0]
    assert abs(c - y) <= 2 * (img.cross_range_m[1] - img.cross_range_m[0])
    assert img.db.max() == 0 and img.db.min() >= -40
    pgm = img.to_pgm()
    assert pgm.startswith(b"P5\n")


def test_isar_rejects_wide_aperture():
    f = np.linspace(2e9, 3e9, 8)
    with pytest.raises(GridError, match="aperture"):
        isar([_point_sweep(f, [0.0])] * 2, [0.0, 40.0])


def test_cross_range_resolution():
    assert cross_range_resolution(3e9, 20.0) == pytest.approx(C0 / (2 * 3e9 * np.radians(20)))
