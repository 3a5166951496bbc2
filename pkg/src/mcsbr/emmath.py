"""Complex vector algebra, Snell's law and Fresnel interface coefficients.

Everything here operates on numpy arrays and broadcasts over leading batch
dimensions, so the same functions serve scalar unit tests and the wavefront
solvers. Vectors are arrays whose last axis has length 3; complex field
vectors (``ComplexVec3``) use ``complex128``.

Conventions
-----------
* Time dependence ``exp(+j w t)``; a plane wave is ``E0 exp(-j k0 k.r)``.
* ``s_hat = dir_in x normal`` (normalized), ``p_hat = s_hat x dir`` for each
  propagation direction. In this basis a perfect conductor has
  ``r_s = -1`` and ``r_p = +1``.
* Normals passed to the interface routines are re-oriented internally to
  face the incoming ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

C0 = 299_792_458.0
"""Speed of light in vacuum (m/s)."""

ETA0 = 376.730313668
"""Free-space wave impedance (ohm)."""

GRAZING_TOL = 1e-9
NORMAL_INCIDENCE_TOL = 1e-6

ComplexVec3 = np.ndarray
"""Alias for a complex array with trailing dimension 3."""


class DomainError(ValueError):
    """Raised for non-physical material or angle inputs."""


class DegenerateGeometryError(ValueError):
    """Raised for grazing incidence where reflection is ill-defined."""


class ContractViolation(ValueError):
    """Raised when a field is not transverse to its propagation direction."""


# ---------------------------------------------------------------------------
# vector helpers


def dot(a, b):
    """Bilinear dot product over the last axis (no conjugation)."""
    return np.einsum("...i,...i->...", a, b)


def hnorm(e) -> np.ndarray:
    """Hermitian norm ``sqrt(sum |e_i|^2)``."""
    e = np.asarray(e)
    return np.sqrt(np.sum((e * np.conj(e)).real, axis=-1))


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def cvec(x, y, z) -> ComplexVec3:
    return np.array([x, y, z], dtype=complex)


# ---------------------------------------------------------------------------
# materials


@dataclass(frozen=True)
class Material:
    """Homogeneous lossless medium, or a perfect electric conductor."""

    name: str
    eps_r: float = 1.0
    mu_r: float = 1.0
    is_pec: bool = False

    def __post_init__(self):
        if not self.is_pec:
            for field, value in (("eps_r", self.eps_r), ("mu_r", self.mu_r)):
                if not (math.isfinite(value) and value > 0):
                    raise DomainError(f"material {self.name!r}: {field} must be finite and > 0, got {value}")

    @property
    def n(self) -> float:
        """Refractive index ``sqrt(eps_r * mu_r)``; infinite for PEC."""
        if self.is_pec:
            return math.inf
        return math.sqrt(self.eps_r * self.mu_r)

    @property
    def eta_rel(self) -> float:
        """Wave impedance relative to free space, ``sqrt(mu_r / eps_r)``."""
        if self.is_pec:
            return 0.0
        return math.sqrt(self.mu_r / self.eps_r)


# ---------------------------------------------------------------------------
# Fresnel


@dataclass
class InterfaceCoefficients:
    r_s: np.ndarray
    r_p: np.ndarray
    t_s: np.ndarray
    t_p: np.ndarray
    cos_theta_t: np.ndarray
    total_internal_reflection: np.ndarray

    @property
    def mean_reflection(self) -> np.ndarray:
        """Average reflection magnitude ``(|r_s| + |r_p|) / 2``."""
        return 0.5 * (np.abs(self.r_s) + np.abs(self.r_p))

    def take(self, idx) -> "InterfaceCoefficients":
        return InterfaceCoefficients(
            self.r_s[idx], self.r_p[idx], self.t_s[idx], self.t_p[idx],
            self.cos_theta_t[idx], self.total_internal_reflection[idx],
        )


def fresnel(n1, n2, cos_theta_i, mu1=1.0, mu2=1.0) -> InterfaceCoefficients:
    """Fresnel amplitude coefficients for a planar interface.

    Args:
        n1: refractive index on the incident side.
        n2: refractive index on the far side.
        cos_theta_i: cosine of the angle of incidence, in (0, 1].
        mu1, mu2: relative permeabilities (only enter through the wave
            impedances ``eta = mu / n``).

    Returns:
        Coefficients in the s/p basis described in the module docstring.
        Under total internal reflection ``cos_theta_t`` is negative
        imaginary (evanescent decay for ``exp(+j w t)``).
    """
    n1, n2, ci, mu1, mu2 = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (n1, n2, cos_theta_i, mu1, mu2))
    )
    for name, arr in (("n1", n1), ("n2", n2), ("mu1", mu1), ("mu2", mu2)):
        if not np.all(np.isfinite(arr) & (arr > 0)):
            raise DomainError(f"{name} must be finite and > 0")
    if not np.all((ci > 0) & (ci <= 1)):
        raise DomainError("cos_theta_i must lie in (0, 1]")

    sin_t2 = (n1 / n2) ** 2 * (1.0 - ci * ci)
    tir = sin_t2 > 1.0
    ct = np.where(tir, -1j * np.sqrt(np.abs(sin_t2 - 1.0)), np.sqrt(np.clip(1.0 - sin_t2, 0.0, None)) + 0j)
    eta1 = mu1 / n1
    eta2 = mu2 / n2

    r_s = (eta2 * ci - eta1 * ct) / (eta2 * ci + eta1 * ct)
    t_s = 2 * eta2 * ci / (eta2 * ci + eta1 * ct)
    r_p = (eta1 * ci - eta2 * ct) / (eta1 * ci + eta2 * ct)
    t_p = 2 * eta2 * ci / (eta1 * ci + eta2 * ct)
    return InterfaceCoefficients(r_s, r_p, t_s, t_p, ct, tir)


def pec_coefficients(shape=()) -> InterfaceCoefficients:
    """Perfect-conductor limit: ``r_s = -1``, ``r_p = +1``, nothing transmitted."""
    ones = np.ones(shape, dtype=complex)
    zeros = np.zeros(shape, dtype=complex)
    return InterfaceCoefficients(-ones, ones.copy(), zeros, zeros.copy(), zeros.copy(), np.zeros(shape, dtype=bool))


def transmitted_power_factor(n1, n2, cos_theta_i, coeffs: InterfaceCoefficients, mu1=1.0, mu2=1.0):
    """Factor ``(eta1 cos_t) / (eta2 cos_i)`` converting ``|t|^2`` to power transmittance."""
    eta1 = np.asarray(mu1) / np.asarray(n1)
    eta2 = np.asarray(mu2) / np.asarray(n2)
    return np.where(coeffs.total_internal_reflection, 0.0, eta1 * coeffs.cos_theta_t.real / (eta2 * np.asarray(cos_theta_i)))


# ---------------------------------------------------------------------------
# ray directions


def _facing(direction, normal):
    """Return ``normal`` flipped where needed so that ``dir . normal < 0``."""
    dn = dot(direction, normal)
    return np.where((dn > 0)[..., None], -normal, normal), np.abs(dn)


def reflect(direction, normal):
    """Mirror ``direction`` about the plane with the given normal."""
    direction = np.asarray(direction, dtype=float)
    normal = np.asarray(normal, dtype=float)
    dn = dot(direction, normal)
    if np.any(np.abs(dn) < GRAZING_TOL):
        raise DegenerateGeometryError("grazing incidence: |dir . normal| < 1e-9")
    return direction - 2.0 * dn[..., None] * normal


def refract(direction, normal, n1, n2):
    """Snell refraction of ``direction`` from index ``n1`` into ``n2``.

    Returns ``(t_dir, tir)``: the transmitted unit direction and a boolean
    total-internal-reflection mask. Rows with ``tir`` set have ``t_dir = 0``.
    """
    direction = np.asarray(direction, dtype=float)
    nrm, ci = _facing(direction, np.asarray(normal, dtype=float))
    if np.any(ci < GRAZING_TOL):
        raise DegenerateGeometryError("grazing incidence: |dir . normal| < 1e-9")
    eta = np.broadcast_to(np.asarray(n1, dtype=float) / np.asarray(n2, dtype=float), ci.shape)
    k = 1.0 - eta * eta * (1.0 - ci * ci)
    tir = k < 0
    ct = np.sqrt(np.clip(k, 0.0, None))
    t_dir = eta[..., None] * direction + (eta * ci - ct)[..., None] * nrm
    t_dir = np.where(tir[..., None], 0.0, t_dir)
    return t_dir, tir


@dataclass
class SPBasis:
    s_hat: np.ndarray
    p_hat_in: np.ndarray
    p_hat_out_r: np.ndarray
    p_hat_out_t: np.ndarray
    dir_r: np.ndarray
    dir_t: np.ndarray

    def __iter__(self):
        # unpacks as the 4-tuple (s, p_in, p_out_r, p_out_t)
        return iter((self.s_hat, self.p_hat_in, self.p_hat_out_r, self.p_hat_out_t))

    def take(self, idx) -> "SPBasis":
        return SPBasis(*(getattr(self, f)[idx] for f in ("s_hat", "p_hat_in", "p_hat_out_r", "p_hat_out_t", "dir_r", "dir_t")))


def sp_basis(dir_in, normal, n1=1.0, n2=1.0) -> SPBasis:
    """Polarization bases for the incident, reflected and transmitted waves.

    Near normal incidence (``|dir x normal| < 1e-6``) the plane of incidence
    is undefined and ``s_hat`` falls back to the projection of the global x
    axis onto the plane orthogonal to ``dir_in`` (y axis if x is parallel).
    Under total internal reflection ``p_hat_out_t`` and ``dir_t`` are zero.
    """
    d = np.asarray(dir_in, dtype=float)
    nrm, ci = _facing(d, np.asarray(normal, dtype=float))
    if np.any(ci < GRAZING_TOL):
        raise DegenerateGeometryError("grazing incidence: |dir . normal| < 1e-9")

    s = np.cross(d, nrm)
    s_len = np.linalg.norm(s, axis=-1)
    degenerate = s_len < NORMAL_INCIDENCE_TOL
    if np.any(degenerate):
        ex = np.broadcast_to(np.array([1.0, 0.0, 0.0]), d.shape)
        ey = np.broadcast_to(np.array([0.0, 1.0, 0.0]), d.shape)
        fx = ex - dot(ex, d)[..., None] * d
        fy = ey - dot(ey, d)[..., None] * d
        fallback = np.where((np.linalg.norm(fx, axis=-1) > 1e-3)[..., None], fx, fy)
        s = np.where(degenerate[..., None], fallback, s)
        s_len = np.linalg.norm(s, axis=-1)
    s = s / s_len[..., None]

    d_r = d + 2.0 * ci[..., None] * nrm
    d_t, _ = refract(d, nrm, np.broadcast_to(np.asarray(n1, float), ci.shape), np.broadcast_to(np.asarray(n2, float), ci.shape))
    t_len = np.linalg.norm(d_t, axis=-1, keepdims=True)
    d_t = np.where(t_len > 0, d_t / np.where(t_len > 0, t_len, 1.0), 0.0)
    return SPBasis(s, np.cross(s, d), np.cross(s, d_r), np.cross(s, d_t), d_r, d_t)


def interface_transform(E, branch: str, coeffs: InterfaceCoefficients, bases: SPBasis, dir_in=None, check=True):
    """Apply the reflection or transmission matrix to a transverse field.

    ``E`` has shape ``(..., 3)`` or ``(..., P, 3)`` for ``P`` polarization
    states sharing one geometry; coefficient and basis arrays broadcast over
    the leading batch dimensions.

    Raises:
        ContractViolation: ``check`` is set and ``E`` is not transverse to
            ``dir_in`` (relative tolerance 1e-9).
    """
    E = np.asarray(E, dtype=complex)
    s = np.asarray(bases.s_hat)
    pol_axis = E.ndim - s.ndim == 1

    def vec(a):
        a = np.asarray(a)
        return a[..., None, :] if pol_axis else a

    def scal(c):
        c = np.asarray(c)
        return c[..., None, None] if pol_axis else c[..., None]

    if branch == "reflect":
        c_s, c_p, p_out = coeffs.r_s, coeffs.r_p, bases.p_hat_out_r
    elif branch == "transmit":
        c_s, c_p, p_out = coeffs.t_s, coeffs.t_p, bases.p_hat_out_t
    else:
        raise ValueError(f"unknown branch {branch!r}")

    if check:
        if dir_in is None:
            raise ContractViolation("dir_in is required for the transversality check")
        resid = np.abs(dot(E, vec(np.asarray(dir_in, dtype=float))))
        if np.any(resid > 1e-9 * np.maximum(hnorm(E), 1e-300)):
            raise ContractViolation("incident field is not transverse to its propagation direction")

    s = vec(s)
    es = dot(E, s)[..., None]
    ep = dot(E, vec(bases.p_hat_in))[..., None]
    return scal(c_s) * es * s + scal(c_p) * ep * vec(p_out)
