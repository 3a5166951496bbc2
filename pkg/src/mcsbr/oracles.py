"""Closed-form and brute-force references for testing the solvers.

Nothing here imports the solver physics: the Fresnel formulas below are
the scalar normal-incidence forms written out independently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

C0 = 299_792_458.0


@dataclass(frozen=True)
class LayerStack:
    """Planar layers between two half-spaces, listed from the illuminated side.

    ``layers`` holds ``(refractive_index, thickness_m)`` pairs.
    """

    layers: tuple[tuple[float, float], ...]
    n_before: float = 1.0
    n_after: float = 1.0

    def __post_init__(self):
        for n, d in self.layers:
            if not (n > 0 and d > 0):
                raise ValueError("layer indices and thicknesses must be positive")
        if not (self.n_before > 0 and self.n_after > 0):
            raise ValueError("half-space indices must be positive")


def _r(na, nb):
    return (na - nb) / (na + nb)


def _t(na, nb):
    return 2.0 * na / (na + nb)


def _characteristic(stack: LayerStack, f: float):
    k0 = 2.0 * math.pi * f / C0
    m = np.eye(2, dtype=complex)
    for n, d in stack.layers:
        delta = k0 * n * d
        c, s = math.cos(delta), math.sin(delta)
        m = m @ np.array([[c, 1j * s / n], [1j * n * s, c]])
    return m


def slab_reflection(stack: LayerStack, f: float, pec_backed: bool = False) -> complex:
    """Normal-incidence reflection coefficient of a layer stack (characteristic-matrix method).

    With ``pec_backed`` the last layer sits on a perfect conductor.
    The phase reference is the first interface, with ``exp(+j w t)`` time
    dependence.
    """
    m = _characteristic(stack, f)
    tail = np.array([0.0, 1.0]) if pec_backed else np.array([1.0, stack.n_after])
    B, C = m @ tail
    y0 = stack.n_before
    return complex((y0 * B - C) / (y0 * B + C))


def slab_transmission(stack: LayerStack, f: float) -> complex:
    m = _characteristic(stack, f)
    B, C = m @ np.array([1.0, stack.n_after])
    return complex(2.0 * stack.n_before / (stack.n_before * B + C))


def plate_rcs(a: float, b: float, wavelength: float) -> float:
    """Broadside physical-optics RCS of a flat conducting plate (m^2)."""
    return 4.0 * math.pi * (a * b) ** 2 / wavelength ** 2


def sphere_go_rcs(radius: float) -> float:
    """Optical-limit RCS of a conducting sphere (m^2)."""
    return math.pi * radius ** 2


def plate_rcs_numeric(a: float, b: float, wavelength: float, theta_deg: float = 0.0, n: int = 400) -> float:
    """Monostatic PO RCS of a plate tilted by ``theta`` about one edge axis, by midpoint quadrature."""
    k = 2.0 * math.pi / wavelength
    th = math.radians(theta_deg)
    x = (np.arange(n) + 0.5) / n * a - a / 2
    phase = np.exp(2j * k * math.sin(th) * x)
    integral = phase.sum() * (a / n) * b
    return 4.0 * math.pi * abs(integral * math.cos(th)) ** 2 / wavelength ** 2


def enumerate_layered_paths(stack: LayerStack, max_bounce: int, pec_backed: bool = False):
    """Every reflect/transmit sequence of a normally incident ray, up to ``max_bounce`` hits.

    Returns tuples ``(sequence, amplitude, optical_length)``, one per
    backscattered event: the first-surface reflection and each exit back
    through the first interface. ``sequence`` spells the choices made at
    the hits before the emitting one (``'r'``/``'t'``); ``optical_length``
    is measured from the first interface and back.
    """
    ns = [stack.n_before] + [n for n, _ in stack.layers] + [stack.n_after]
    ds = [0.0] + [d for _, d in stack.layers]
    n_if = len(stack.layers) + 1  # interfaces 0..L; the last may be a conductor
    out = []
    # (interface, going_down, hits so far, sequence, amplitude, optical length)
    todo = [(0, True, 0, "", 1.0 + 0j, 0.0)]
    while todo:
        i, down, h, seq, amp, length = todo.pop()
        h += 1
        if h > max_bounce:
            continue
        if down:
            na, nb = ns[i], ns[i + 1]
            last = i == n_if - 1
            if last and pec_backed:
                if h < max_bounce:
                    todo.append((i - 1, False, h, seq + "r", -amp, length + ns[i] * ds[i]))
                continue
            if i == 0:
                out.append((seq, amp * _r(na, nb), length))
            if h < max_bounce:
                if i > 0:
                    todo.append((i - 1, False, h, seq + "r", amp * _r(na, nb), length + ns[i] * ds[i]))
                if not last:
                    todo.append((i + 1, True, h, seq + "t", amp * _t(na, nb), length + ns[i + 1] * ds[i + 1]))
        else:
            na, nb = ns[i + 1], ns[i]
            if i == 0:
                out.append((seq, amp * _t(na, nb), length))
            if h < max_bounce:
                todo.append((i + 1, True, h, seq + "r", amp * _r(na, nb), length + ns[i + 1] * ds[i + 1]))
                if i > 0:
                    todo.append((i - 1, False, h, seq + "t", amp * _t(na, nb), length + ns[i] * ds[i]))
    return sorted(out)


def layered_sum(paths, f: float) -> complex:
    k0 = 2.0 * math.pi * f / C0
    return sum(a * cmath.exp(-1j * k0 * L) for _, a, L in paths)


def plate_specular_range(standoff: float) -> float:
    """Range of a broadside plate's specular flash: its standoff toward the radar."""
    return float(standoff)


def dihedral_specular_ranges(seam_range: float) -> list[float]:
    """Double-bounce range of a right-angle dihedral viewed in its symmetry plane.

    Any ray entering the corner travels the same total distance as one
    reflecting at the seam, so the double-bounce flash sits at the seam's
    range regardless of the wall length.
    """
    return [float(seam_range)]


def slab_peak_ranges(front_range: float, n: float, thickness: float, count: int = 3) -> list[float]:
    """Range-profile peaks of a slab seen face-on: front face, then one per internal round trip.

    Each round trip adds ``2 n d`` of optical path, i.e. ``n d`` of
    monostatic range, so peaks fall at ``R, R - n d, R - 2 n d, ...`` when
    range increases toward the radar.
    """
    return [float(front_range - k * n * thickness) for k in range(count)]
