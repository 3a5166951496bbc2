import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsbr.emmath import (
    ContractViolation, DegenerateGeometryError, DomainError, Material, dot, fresnel,
    interface_transform, normalize, pec_coefficients, reflect, refract, sp_basis,
    transmitted_power_factor,
)

indices = st.floats(1.0, 4.0)
cosines = st.floats(0.05, 1.0)
unit = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) > 0.1).map(
    lambda v: np.asarray(v) / np.linalg.norm(v))


@given(indices, indices, cosines)
def test_energy_conservation_both_polarizations(n1, n2, ci):
    c = fresnel(n1, n2, ci)
    T = transmitted_power_factor(n1, n2, ci, c)
    assert abs(abs(c.r_s) ** 2 + T * abs(c.t_s) ** 2 - 1) < 1e-9
    assert abs(abs(c.r_p) ** 2 + T * abs(c.t_p) ** 2 - 1) < 1e-9


@given(indices, indices)
def test_normal_incidence_matches_scalar_form(n1, n2):
    c = fresnel(n1, n2, 1.0)
    assert abs(c.r_s - (n1 - n2) / (n1 + n2)) < 1e-12
    assert abs(c.t_s - 2 * n1 / (n1 + n2)) < 1e-12


@given(st.floats(1.05, 3.0), cosines)
def test_total_internal_reflection_is_lossless(n, ci):
    c = fresnel(n, 1.0, ci)
    if c.total_internal_reflection:
        assert abs(abs(c.r_s) - 1) < 1e-9 and abs(abs(c.r_p) - 1) < 1e-9
        assert c.cos_theta_t.imag < 0


def test_brewster_angle_zeroes_p_reflection():
    n = 1.5
    ci = np.cos(np.arctan(n))
    assert abs(fresnel(1.0, n, ci).r_p) < 1e-12


def test_domain_errors():
    with pytest.raises(DomainError):
        fresnel(1.0, -1.0, 0.5)
    with pytest.raises(DomainError):
        fresnel(1.0, 1.5, 0.0)
    with pytest.raises(ValueError):
        Material("bad", eps_r=-2.0)


@given(unit, unit)
def test_reflection_preserves_length_and_flips_normal_component(d, n):
    if abs(dot(d, n)) < 1e-3:
        return
    r = reflect(d, n)
    assert abs(np.linalg.norm(r) - 1) < 1e-12
    assert abs(dot(r, n) + dot(d, n)) < 1e-12


@given(unit, unit, indices, indices)
def test_snell_law(d, n, n1, n2):
    if abs(dot(d, n)) < 1e-3:
        return
    t, tir = refract(d, n, n1, n2)
    if tir:
        return
    assert abs(np.linalg.norm(t) - 1) < 1e-9
    sin_i = np.linalg.norm(np.cross(d, n))
    sin_t = np.linalg.norm(np.cross(t, n))
    assert abs(n1 * sin_i - n2 * sin_t) < 1e-9


def test_grazing_raises():
    with pytest.raises(DegenerateGeometryError):
        reflect([1.0, 0, 0], [0, 0, 1.0])


@given(unit, unit, indices, indices)
@settings(max_examples=60)
def test_bases_are_orthonormal_and_transverse(d, n, n1, n2):
    if abs(dot(d, n)) < 1e-3:
        return
    b = sp_basis(d, n, n1, n2)
    for a, k in ((b.s_hat, d), (b.p_hat_in, d), (b.p_hat_out_r, b.dir_r)):
        assert abs(np.linalg.norm(a) - 1) < 1e-9
        assert abs(dot(a, k)) < 1e-9
    assert abs(dot(b.s_hat, b.p_hat_in)) < 1e-9


def test_pec_reflection_cancels_tangential_field():
    d = normalize(np.array([0.3, -0.2, -1.0]))
    n = np.array([0.0, 0.0, 1.0])
    b = sp_basis(d, n)
    c = pec_coefficients()
    for E in (b.s_hat, b.p_hat_in):
        Er = interface_transform(E.astype(complex), "reflect", c, b, d)
        total = E + Er
        assert np.linalg.norm(np.cross(n, total)) < 1e-12


def test_transversality_contract():
    d = np.array([0.0, 0.0, -1.0])
    b = sp_basis(d, [0, 0, 1.0], 1.0, 1.5)
    c = fresnel(1.0, 1.5, 1.0)
    with pytest.raises(ContractViolation):
        interface_transform(np.array([0, 0, 1.0 + 0j]), "reflect", c, b, d)
