"""Plane-wave ray states and the per-hit physics shared by both solvers.

States are stored structure-of-arrays so a whole wavefront advances with
a handful of numpy calls. Each state carries ``P`` transmit polarizations
at once (``E`` has shape ``(N, P, 3)``): the path geometry does not depend
on polarization, so V and H share one trace.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .emmath import (
    InterfaceCoefficients,
    SPBasis,
    dot,
    fresnel,
    interface_transform,
    sp_basis,
)
from .geometry import Hit, Scene

# interaction cases
PEC, ENTERING, EXITING, INTERIOR = 0, 1, 2, 3
CASE_NAMES = ("pec", "entering", "exiting", "interior")

GRAZING_KILL = 1e-6


@dataclass
class PathState:
    origin: np.ndarray     # (N, 3)
    dir: np.ndarray        # (N, 3)
    E: np.ndarray          # (N, P, 3) complex
    phi: np.ndarray        # optical path length so far (m)
    prob: np.ndarray       # product of branch probabilities
    weight: np.ndarray     # product of roulette compensations
    bounce: np.ndarray     # int64
    medium: np.ndarray     # int64 material index of the medium the ray travels in
    ray_id: np.ndarray     # uint64 launch sample id
    branches: np.ndarray   # uint64; bit b-1 set when the hit at bounce b transmitted

    def __len__(self) -> int:
        return len(self.phi)

    @property
    def nbytes(self) -> int:
        return sum(getattr(self, f.name).nbytes for f in fields(self))

    @staticmethod
    def bytes_per_state(n_pol: int = 2) -> int:
        return 3 * 8 + 3 * 8 + n_pol * 3 * 16 + 7 * 8

    def take(self, idx) -> "PathState":
        return PathState(**{f.name: getattr(self, f.name)[idx] for f in fields(self)})

    @staticmethod
    def concat(states: list["PathState"]) -> "PathState":
        return PathState(**{f.name: np.concatenate([getattr(s, f.name) for s in states])
                            for f in fields(PathState)})

    def medium_n(self, scene: Scene) -> np.ndarray:
        return scene.mat_n[self.medium]


def init_path(points, k_inc, E0, ambient: int, ray_id, ambient_n: float = 1.0) -> PathState:
    """Launch states on the incident wavefront.

    The phase starts at ``n * k_inc . p`` so every launch point on one
    wavefront shares the phase the plane wave has there, measured from the
    coordinate origin.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    k = np.asarray(k_inc, dtype=float)
    E0 = np.asarray(E0, dtype=complex)
    if E0.ndim == 1:
        E0 = E0[None]
    return PathState(
        origin=points.copy(),
        dir=np.broadcast_to(k, (n, 3)).copy(),
        E=np.broadcast_to(E0, (n,) + E0.shape[-2:]).copy(),
        phi=ambient_n * (points @ k),
        prob=np.ones(n),
        weight=np.ones(n),
        bounce=np.zeros(n, dtype=np.int64),
        medium=np.full(n, ambient, dtype=np.int64),
        ray_id=np.asarray(ray_id, dtype=np.uint64).reshape(n),
        branches=np.zeros(n, dtype=np.uint64),
    )


def advance(state: PathState, hit: Hit, scene: Scene) -> PathState:
    """Move every ray to its hit point, accumulating ``n * distance`` of phase."""
    seg = hit.point - state.origin
    dist = np.sqrt(np.einsum("ij,ij->i", seg, seg))
    return PathState(
        origin=hit.point,
        dir=state.dir,
        E=state.E,
        phi=state.phi + state.medium_n(scene) * dist,
        prob=state.prob,
        weight=state.weight,
        bounce=state.bounce + 1,
        medium=state.medium,
        ray_id=state.ray_id,
        branches=state.branches,
    )


def cos_incidence(state: PathState, hit: Hit) -> np.ndarray:
    return np.abs(np.einsum("ij,ij->i", state.dir, hit.normal))


def classify(hit: Hit) -> np.ndarray:
    """Interaction case per hit (``PEC``, ``ENTERING``, ``EXITING`` or ``INTERIOR``)."""
    case = np.full(len(hit), INTERIOR, dtype=np.int8)
    case[hit.far_ambient & ~hit.far_side_pec] = EXITING
    case[hit.near_ambient & ~hit.far_side_pec] = ENTERING
    case[hit.far_side_pec] = PEC
    return case


@dataclass
class Interaction:
    """Fresnel data at a batch of hits, shared by both outcome branches."""

    case: np.ndarray
    cos_i: np.ndarray
    coeffs: InterfaceCoefficients
    bases: SPBasis
    can_transmit: np.ndarray
    n_far: np.ndarray      # index on the far side (ambient-side placeholder on PEC)

    def take(self, idx) -> "Interaction":
        return Interaction(self.case[idx], self.cos_i[idx], self.coeffs.take(idx),
                           self.bases.take(idx), self.can_transmit[idx], self.n_far[idx])


def interact(state: PathState, hit: Hit) -> Interaction:
    """Fresnel coefficients and polarization bases at each hit.

    Conductors use the ``r_s = -1``, ``r_p = +1`` limit and never transmit.
    """
    pec = hit.far_side_pec
    n1 = hit.n_incident
    n2 = np.where(pec, n1, hit.n_transmit)
    mu2 = np.where(pec, hit.mu_incident, hit.mu_transmit)
    ci = np.clip(-np.einsum("ij,ij->i", state.dir, hit.normal), 1e-300, 1.0)
    c = fresnel(n1, n2, ci, hit.mu_incident, mu2)
    if np.any(pec):
        one = np.ones_like(c.r_s)
        zero = np.zeros_like(c.r_s)
        c = InterfaceCoefficients(
            r_s=np.where(pec, -one, c.r_s), r_p=np.where(pec, one, c.r_p),
            t_s=np.where(pec, zero, c.t_s), t_p=np.where(pec, zero, c.t_p),
            cos_theta_t=np.where(pec, zero, c.cos_theta_t),
            total_internal_reflection=c.total_internal_reflection & ~pec,
        )
    bases = sp_basis(state.dir, hit.normal, n1, n2)
    can_t = ~pec & ~c.total_internal_reflection
    return Interaction(classify(hit), ci, c, bases, can_t, n2)


@dataclass
class BranchOutcome:
    """One candidate continuation for a batch of rays."""

    kind: str
    new_dir: np.ndarray
    new_E: np.ndarray
    new_medium: np.ndarray
    branch_prob: np.ndarray


def reflect_outcome(state: PathState, hit: Hit, inter: Interaction) -> BranchOutcome:
    E = interface_transform(state.E, "reflect", inter.coeffs, inter.bases, check=False)
    return BranchOutcome("reflect", inter.bases.dir_r, E, hit.near, np.ones(len(state)))


def transmit_outcome(state: PathState, hit: Hit, inter: Interaction) -> BranchOutcome:
    """Transmitted continuation; only meaningful where ``inter.can_transmit``."""
    E = interface_transform(state.E, "transmit", inter.coeffs, inter.bases, check=False)
    return BranchOutcome("transmit", inter.bases.dir_t, E, hit.far, np.ones(len(state)))


def branch_outcomes(state: PathState, hit: Hit, inter: Interaction | None = None) -> list[list[BranchOutcome]]:
    """Per-ray outcome lists (length 1 on conductors and under TIR, else 2).

    Convenience wrapper over :func:`reflect_outcome`/:func:`transmit_outcome`
    for single rays and tests; the solvers call those directly on batches.
    """
    if inter is None:
        inter = interact(state, hit)
    r = reflect_outcome(state, hit, inter)
    t = transmit_outcome(state, hit, inter)
    out = []
    for i in range(len(state)):
        row = [BranchOutcome("reflect", r.new_dir[i], r.new_E[i], r.new_medium[i], np.float64(1.0))]
        if inter.can_transmit[i]:
            row.append(BranchOutcome("transmit", t.new_dir[i], t.new_E[i], t.new_medium[i], np.float64(1.0)))
        out.append(row)
    return out


def continue_with(state: PathState, outcome: BranchOutcome, branch_prob=1.0) -> PathState:
    """States after taking ``outcome`` (``state`` already advanced to the hit)."""
    bits = state.branches
    if outcome.kind == "transmit":
        bits = bits | (np.uint64(1) << (state.bounce.astype(np.uint64) - np.uint64(1)))
    return PathState(
        origin=state.origin,
        dir=outcome.new_dir,
        E=outcome.new_E,
        phi=state.phi,
        prob=state.prob * branch_prob,
        weight=state.weight,
        bounce=state.bounce,
        medium=np.asarray(outcome.new_medium, dtype=np.int64),
        ray_id=state.ray_id,
        branches=bits,
    )


def transverse_residual(state: PathState) -> np.ndarray:
    """``|E . dir| / |E|`` per ray and polarization."""
    num = np.abs(dot(state.E, state.dir[:, None, :]))
    den = np.sqrt(np.sum(np.abs(state.E) ** 2, axis=-1))
    return num / np.maximum(den, 1e-300)
