import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsbr.oracles import (
    LayerStack, enumerate_layered_paths, layered_sum, plate_rcs, plate_rcs_numeric, slab_peak_ranges,
    slab_reflection, slab_transmission, sphere_go_rcs,
)

layer = st.tuples(st.floats(1.0, 3.0), st.floats(0.05, 1.0))


@given(st.lists(layer, min_size=1, max_size=3), st.floats(0.5e9, 5e9))
@settings(max_examples=40)
def test_lossless_stack_conserves_power(layers, f):
    s = LayerStack(tuple(layers))
    r, t = slab_reflection(s, f), slab_transmission(s, f)
    assert abs(r) ** 2 + abs(t) ** 2 == pytest.approx(1.0, abs=1e-9)


@given(st.lists(layer, min_size=1, max_size=3), st.floats(0.5e9, 5e9))
@settings(max_examples=40)
def test_pec_backed_stack_is_a_perfect_mirror(layers, f):
    assert abs(slab_reflection(LayerStack(tuple(layers)), f, pec_backed=True)) == pytest.approx(1.0, abs=1e-12)


def test_single_interface_and_half_wave_slab():
    n = 1.5
    assert slab_reflection(LayerStack(((n, 1e-9),)), 1e9) == pytest.approx(0, abs=1e-6)
    # half-wave layer is transparent
    lam = 0.3
    d = lam / (2 * n)
    assert abs(slab_reflection(LayerStack(((n, d),)), 299_792_458.0 / lam)) < 1e-12


@pytest.mark.parametrize("pec", [False, True])
def test_path_enumeration_converges_to_matrix_method(pec):
    s = LayerStack(((1.5 ** 0.5, 3.0),))
    paths = enumerate_layered_paths(s, 60, pec_backed=pec)
    for f in (1e9, 1.7e9, 3e9):
        assert abs(layered_sum(paths, f) - slab_reflection(s, f, pec)) < 1e-9


def test_two_layer_enumeration():
    s = LayerStack(((1.3, 0.4), (2.0, 0.7)))
    paths = enumerate_layered_paths(s, 30)
    assert abs(layered_sum(paths, 2e9) - slab_reflection(s, 2e9)) < 1e-6
    assert paths[0][0] == "" and paths[0][2] == 0.0


def test_closed_forms():
    assert plate_rcs(1, 1, 0.1) == pytest.approx(400 * math.pi)
    assert sphere_go_rcs(1) == pytest.approx(math.pi)
    assert plate_rcs_numeric(1, 1, 0.1) == pytest.approx(plate_rcs(1, 1, 0.1), rel=1e-12)
    assert slab_peak_ranges(1.5, 2.0, 1.0, 3) == [1.5, -0.5, -2.5]


def test_invalid_stack():
    with pytest.raises(ValueError):
        LayerStack(((1.5, -1.0),))
