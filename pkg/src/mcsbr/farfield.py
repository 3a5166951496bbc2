"""Equivalent surface currents and their far-field radiation.

Currents are stored scaled by the free-space impedance (``eta0 * J`` and
``M``), so both are O(|E|). A :class:`Contribution` batch keeps only
frequency-independent data; :func:`evaluate_sweep` applies the
``exp(-j k0 L)`` factors for any number of frequencies afterwards.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numba
import numpy as np

from .emmath import C0, interface_transform
from .geometry import Hit, Scene, occluded
from .paths import ENTERING, EXITING, PEC, Interaction, PathState

POLS = ("V", "H")


# ---------------------------------------------------------------------------
# radar geometry


def radar_direction(theta_deg, phi_deg) -> np.ndarray:
    """Unit vector from the target toward a radar at spherical angles (degrees)."""
    th, ph = np.radians(theta_deg), np.radians(phi_deg)
    return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def pol_vectors(theta_deg, phi_deg) -> np.ndarray:
    """``(theta_hat, phi_hat)`` at the given angles: rows are the V and H polarizations."""
    th, ph = np.radians(theta_deg), np.radians(phi_deg)
    v = np.array([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)])
    h = np.array([-np.sin(ph), np.cos(ph), 0.0])
    return np.stack([v, h])


# ---------------------------------------------------------------------------
# currents


def meca_currents(hit: Hit, E_inc, dir_in, inter: Interaction):
    """Equivalent currents ``(eta0 J, M)`` on the exterior side of each hit.

    ``E_inc`` is ``(N, P, 3)``. The surface normal used for the currents
    always points into the ambient medium. Interior hits and exits under
    total internal reflection carry no current.
    """
    E = np.asarray(E_inc, dtype=complex)
    k = np.asarray(dir_in, dtype=float)[:, None, :]
    case = inter.case
    J = np.zeros_like(E)
    M = np.zeros_like(E)

    pec = case == PEC
    if np.any(pec):
        n = hit.normal[pec][:, None, :]
        eta = (hit.mu_incident / hit.n_incident)[pec][:, None, None]
        H = np.cross(k[pec], E[pec]) / eta
        J[pec] = 2.0 * np.cross(n, H)

    ent = case == ENTERING
    if np.any(ent):
        sub = inter.take(ent)
        Er = interface_transform(E[ent], "reflect", sub.coeffs, sub.bases, check=False)
        n = hit.normal[ent][:, None, :]
        eta = (hit.mu_incident / hit.n_incident)[ent][:, None, None]
        H = (np.cross(k[ent], E[ent]) + np.cross(sub.bases.dir_r[:, None, :], Er)) / eta
        J[ent] = np.cross(n, H)
        M[ent] = np.cross(E[ent] + Er, n)

    ext = (case == EXITING) & inter.can_transmit
    if np.any(ext):
        sub = inter.take(ext)
        Et = interface_transform(E[ext], "transmit", sub.coeffs, sub.bases, check=False)
        n = -hit.normal[ext][:, None, :]
        eta = (hit.mu_transmit / hit.n_transmit)[ext][:, None, None]
        H = np.cross(sub.bases.dir_t[:, None, :], Et) / eta
        J[ext] = np.cross(n, H)
        M[ext] = np.cross(Et, n)
    return J, M


def chi_visibility(scene: Scene, hit: Hit, case, k_scatter, occlusion: bool = True) -> np.ndarray:
    """1 where the hit point radiates to the receiver, else 0 (as a bool array).

    A point qualifies when it lies on the ambient side of the surface (the
    ray arrives from or leaves into the ambient medium) and, with occlusion
    enabled, nothing blocks the line of sight along ``k_scatter``.
    """
    case = np.asarray(case)
    ok = ((case == ENTERING) | (case == EXITING) | ((case == PEC) & hit.near_ambient))
    if occlusion and np.any(ok):
        idx = np.flatnonzero(ok)
        ok[idx] = ~occluded(scene, hit.point[idx], np.asarray(k_scatter, dtype=float))
    return ok


# ---------------------------------------------------------------------------
# contributions


@dataclass
class Contribution:
    """Batch of far-field scattering events (one row per emitting hit)."""

    A_J: np.ndarray        # (N, P, 3) complex, eta0-scaled electric current amplitude
    A_M: np.ndarray        # (N, P, 3) complex
    phi: np.ndarray        # (N,) optical path length to the event (m)
    exit_point: np.ndarray  # (N, 3)
    bounce: np.ndarray     # (N,) int64
    ray_id: np.ndarray     # (N,) uint64
    branches: np.ndarray   # (N,) uint64

    def __len__(self) -> int:
        return len(self.phi)

    def take(self, idx) -> "Contribution":
        return Contribution(**{f.name: getattr(self, f.name)[idx] for f in fields(self)})

    @staticmethod
    def empty(n_pol: int = 2) -> "Contribution":
        return Contribution(
            np.zeros((0, n_pol, 3), complex), np.zeros((0, n_pol, 3), complex), np.zeros(0),
            np.zeros((0, 3)), np.zeros(0, np.int64), np.zeros(0, np.uint64), np.zeros(0, np.uint64))

    @staticmethod
    def concat(parts: list["Contribution"]) -> "Contribution":
        parts = [p for p in parts if len(p)]
        if not parts:
            return Contribution.empty()
        return Contribution(**{f.name: np.concatenate([getattr(p, f.name) for p in parts])
                               for f in fields(Contribution)})

    def sorted(self) -> "Contribution":
        """Rows ordered by ``(ray_id, branches, bounce)``; a canonical order for comparisons."""
        return self.take(np.lexsort((self.bounce, self.branches, self.ray_id)))


def make_contribution(state: PathState, hit: Hit, J, M, pdf_area, cos_i) -> Contribution:
    """Scale currents into Monte Carlo integrand samples.

    ``pdf_area`` is the density of launch points per unit launch area;
    ``cos_i`` is ``|dir . normal|`` of the arriving ray, converting the
    launch cross-section into surface area.
    """
    scale = state.weight / (state.prob * np.asarray(pdf_area, dtype=float) * cos_i)
    return Contribution(
        A_J=J * scale[:, None, None],
        A_M=M * scale[:, None, None],
        phi=state.phi.copy(),
        exit_point=hit.point.copy(),
        bounce=state.bounce.copy(),
        ray_id=state.ray_id.copy(),
        branches=state.branches.copy(),
    )


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    """Complex square-root RCS per frequency, receiver and transmitter polarization.

    ``values[f, r, t]`` holds the receiver-``POLS[r]`` response to a
    transmitter-``POLS[t]`` incident wave, in metres.
    """

    frequencies: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if len(self.frequencies) > 1 and np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("frequencies must be strictly increasing")

    def pol(self, rx: str, tx: str | None = None) -> np.ndarray:
        tx = rx if tx is None else tx
        return self.values[:, POLS.index(rx.upper()), POLS.index(tx.upper())]

    def rcs_dbsm(self, rx: str = "V", tx: str | None = None) -> np.ndarray:
        return 20.0 * np.log10(np.maximum(np.abs(self.pol(rx, tx)), 1e-300))

    def __add__(self, other: "SweepResult") -> "SweepResult":
        return SweepResult(self.frequencies, self.values + other.values, dict(self.metadata))

    def to_csv(self, path=None, header: str | None = None) -> str:
        return _write_table("frequency_hz", self.frequencies, self.values, path, header)

    @staticmethod
    def from_csv(path) -> "SweepResult":
        x, values = _read_table(path)
        return SweepResult(x, values)


@dataclass
class AngleSweepResult:
    """Single-frequency square-root RCS versus incidence angle."""

    angles_deg: np.ndarray
    frequency_hz: float
    values: np.ndarray  # (A, 2, 2)
    axis: str = "theta"
    metadata: dict = field(default_factory=dict)

    def pol(self, rx: str, tx: str | None = None) -> np.ndarray:
        tx = rx if tx is None else tx
        return self.values[:, POLS.index(rx.upper()), POLS.index(tx.upper())]

    def rcs_dbsm(self, rx: str = "V", tx: str | None = None) -> np.ndarray:
        return 20.0 * np.log10(np.maximum(np.abs(self.pol(rx, tx)), 1e-300))

    def to_csv(self, path=None, header: str | None = None) -> str:
        return _write_table(f"{self.axis}_deg", self.angles_deg, self.values, path, header)


_COLUMNS = [("vv", 0, 0), ("hh", 1, 1), ("vh", 0, 1), ("hv", 1, 0)]


def _write_table(first, x, values, path, header):
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    cols = [first] + [f"{p}_{name}" for name, _, _ in _COLUMNS for p in ("re", "im")]
    out.write(",".join(cols) + "\n")
    for i, xv in enumerate(x):
        row = [f"{xv:.17g}"]
        for _, r, t in _COLUMNS:
            v = values[i, r, t]
            row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
        out.write(",".join(row) + "\n")
    text = out.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _read_table(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    body = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, 9)
    x = body[:, 0]
    values = np.zeros((len(x), 2, 2), complex)
    for k, (_, r, t) in enumerate(_COLUMNS):
        values[:, r, t] = body[:, 1 + 2 * k] + 1j * body[:, 2 + 2 * k]
    return x, values


@numba.njit(cache=True, nogil=True)
def _accumulate(k0, L, s, out):
    # sequential sum: the result is independent of how callers batch frequencies
    for f in range(k0.shape[0]):
        for n in range(L.shape[0]):
            ph = -k0[f] * L[n]
            e = complex(math.cos(ph), math.sin(ph))
            for c in range(s.shape[1]):
                out[f, c] += s[n, c] * e


def project(contrib: Contribution, k_scatter, rx_vectors):
    """Frequency-independent receiver projections and path lengths.

    Returns ``(s, L)`` with ``s[n, r, t] = R_r . (k x k x A_J + k x A_M)`` and
    ``L = phi - k . exit_point``.
    """
    k = np.asarray(k_scatter, dtype=float)
    kk = k[None, None, :]
    V = np.cross(kk, np.cross(kk, contrib.A_J)) + np.cross(kk, contrib.A_M)
    s = np.einsum("rc,ntc->nrt", np.asarray(rx_vectors, dtype=float), V)
    L = contrib.phi - contrib.exit_point @ k
    return s, L


def evaluate_sweep(contrib: Contribution, frequencies, k_scatter, rx_vectors, metadata=None) -> SweepResult:
    """Square-root RCS sweep radiated by a batch of contributions.

    Assumes a unit-amplitude incident wave. The result is
    ``2 sqrt(pi) R . E_f`` with
    ``E_f = (j k0 / 4 pi) sum (k x k x A_J + k x A_M) exp(-j k0 (phi - k . p))``.
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.size == 0:
        raise ValueError("frequency list is empty")
    k0 = 2.0 * np.pi * freqs / C0
    n_rx = len(rx_vectors)
    n_tx = contrib.A_J.shape[1] if len(contrib) else 2
    acc = np.zeros((len(freqs), n_rx * n_tx), complex)
    meta = dict(metadata or {})
    if len(contrib):
        s, L = project(contrib, k_scatter, rx_vectors)
        _accumulate(k0, np.ascontiguousarray(L), np.ascontiguousarray(s.reshape(len(L), -1)), acc)
    else:
        meta["empty"] = True
    values = (2.0 * math.sqrt(math.pi)) * (1j * k0 / (4.0 * math.pi))[:, None] * acc
    return SweepResult(freqs, values.reshape(len(freqs), n_rx, n_tx), meta)
