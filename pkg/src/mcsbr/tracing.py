"""Illumination setup and the per-bounce step shared by both solvers.

Both solvers integrate the same integrand because they call the same
:func:`surface_step`; they differ only in how launch points are placed and
which branches are followed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .farfield import chi_visibility, make_contribution, meca_currents, pol_vectors, radar_direction
from .geometry import Hit, Scene, intersect
from .paths import GRAZING_KILL, Interaction, PathState, advance, cos_incidence, interact


@dataclass
class Illumination:
    """Plane-wave source and far-field receiver.

    ``tx_pols`` rows are the unit incident polarizations traced together;
    ``rx_pols`` rows are the receiver polarization vectors.
    """

    k_inc: np.ndarray
    tx_pols: np.ndarray
    k_scatter: np.ndarray
    rx_pols: np.ndarray

    @staticmethod
    def monostatic(theta_deg: float, phi_deg: float) -> "Illumination":
        r = radar_direction(theta_deg, phi_deg)
        pols = pol_vectors(theta_deg, phi_deg)
        return Illumination(k_inc=-r, tx_pols=pols, k_scatter=r, rx_pols=pols)

    @staticmethod
    def bistatic(theta_i, phi_i, theta_s, phi_s) -> "Illumination":
        return Illumination(
            k_inc=-radar_direction(theta_i, phi_i), tx_pols=pol_vectors(theta_i, phi_i),
            k_scatter=radar_direction(theta_s, phi_s), rx_pols=pol_vectors(theta_s, phi_s))


@dataclass
class StepCounters:
    """Diagnostics accumulated over bounce steps."""

    traced: list = field(default_factory=list)        # rays cast per bounce index
    escaped: int = 0
    grazing_killed: int = 0
    medium_mismatch: int = 0
    contributions: int = 0

    def count_traced(self, bounce: int, n: int) -> None:
        while len(self.traced) <= bounce:
            self.traced.append(0)
        self.traced[bounce] += n

    def merge(self, other: "StepCounters") -> None:
        for b, n in enumerate(other.traced):
            self.count_traced(b, n)
        self.escaped += other.escaped
        self.grazing_killed += other.grazing_killed
        self.medium_mismatch += other.medium_mismatch
        self.contributions += other.contributions


def surface_step(scene: Scene, state: PathState, illum: Illumination, pdf_area: float,
                 occlusion: bool, counters: StepCounters):
    """Trace every ray of a wavefront to its next hit and radiate from it.

    Rays that miss or graze are dropped. Returns ``(state, hit, inter,
    contribution)`` for the surviving rays, with ``state`` advanced to the
    hit points; ``contribution`` is ``None`` when no hit is visible.
    """
    if len(state):
        counters.count_traced(int(state.bounce[0]), len(state))
    mask, hit = intersect(scene, state.origin, state.dir, scene.eps)
    counters.escaped += int(len(state) - np.count_nonzero(mask))
    state = advance(state.take(mask), hit, scene)
    cos_i = cos_incidence(state, hit)
    ok = cos_i >= GRAZING_KILL
    if not np.all(ok):
        counters.grazing_killed += int(np.count_nonzero(~ok))
        state, hit, cos_i = state.take(ok), hit.take(ok), cos_i[ok]
    counters.medium_mismatch += int(np.count_nonzero(state.medium != hit.near))
    inter = interact(state, hit)
    vis = chi_visibility(scene, hit, inter.case, illum.k_scatter, occlusion)
    contrib = None
    if np.any(vis):
        sub_hit, sub_state = hit.take(vis), state.take(vis)
        J, M = meca_currents(sub_hit, sub_state.E, sub_state.dir, inter.take(vis))
        contrib = make_contribution(sub_state, sub_hit, J, M, pdf_area, cos_i[vis])
        counters.contributions += len(contrib)
    return state, hit, inter, contrib
