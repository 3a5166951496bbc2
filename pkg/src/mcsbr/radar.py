"""Range profiles and ISAR images from coherent sweeps.

Range convention: a point scatterer at position ``p`` contributes
``exp(+2 j k0 (k_s . p))`` to the monostatic sweep, and appears at range
``k_s . p`` -- positive toward the radar, zero at the coordinate origin.
The frequency axis is transformed with the inverse DFT and the two-way
factor ``c0 / 2`` converts delay to range.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .emmath import C0
from .farfield import SweepResult

MAX_APERTURE_DEG = 30.0


class GridError(ValueError):
    pass


def _window(name: str, n: int) -> np.ndarray:
    if name in (None, "none", "rect"):
        return np.ones(n)
    if name == "hann":
        # symmetric Hann without zero endpoints so every sample contributes
        return np.hanning(n + 2)[1:-1]
    raise ValueError(f"unknown window {name!r}")


def uniform_step(x, what: str = "frequency") -> float:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise GridError(f"{what} grid needs at least two samples")
    d = np.diff(x)
    if np.max(np.abs(d - d.mean())) > 1e-6 * abs(d.mean()):
        raise GridError(f"{what} grid is not uniform")
    return float(d.mean())


def axis_transform(values, step_hz: float, window: str = "hann", zero_pad: int = 4, axis: int = -1):
    """Windowed, zero-padded inverse DFT along ``axis``.

    Returns ``(ranges, spectrum)``, ranges increasing, with ``spectrum``
    scaled so a unit-amplitude scatterer centred on a bin has magnitude 1.
    """
    if zero_pad < 1:
        raise ValueError("zero_pad must be >= 1")
    v = np.moveaxis(np.asarray(values, dtype=complex), axis, -1)
    m = v.shape[-1]
    w = _window(window, m)
    n = m * int(zero_pad)
    spec = np.fft.ifft(v * w, n=n, axis=-1) * (n / w.sum())
    # ifft bin j holds delay j/(n df); range = -c tau / 2, so reverse and centre
    spec = np.roll(spec[..., ::-1], 1, axis=-1)
    spec = np.fft.fftshift(spec, axes=-1)
    ranges = (np.arange(n) - n // 2) * C0 / (2.0 * n * step_hz)
    return ranges, np.moveaxis(spec, -1, axis)


@dataclass
class RangeProfile:
    ranges_m: np.ndarray
    magnitude_db: np.ndarray
    window: str
    zero_pad: int
    complex_values: np.ndarray | None = None

    @property
    def bin_spacing(self) -> float:
        return float(self.ranges_m[1] - self.ranges_m[0])

    def peaks(self, count: int, min_separation_m: float = 0.0, floor_db: float = -np.inf):
        """Ranges of the ``count`` largest local maxima, strongest first."""
        m = self.magnitude_db
        local = np.flatnonzero((m[1:-1] >= m[:-2]) & (m[1:-1] >= m[2:])) + 1
        local = local[np.argsort(-m[local])]
        chosen: list[int] = []
        for i in local:
            if m[i] < floor_db:
                break
            if all(abs(self.ranges_m[i] - self.ranges_m[j]) >= min_separation_m for j in chosen):
                chosen.append(int(i))
            if len(chosen) == count:
                break
        return [float(self.ranges_m[i]) for i in chosen]

    def to_csv(self, path=None, header: str | None = None) -> str:
        lines = [f"# {header}"] if header else []
        lines.append(f"# window={self.window} zero_pad={self.zero_pad}")
        lines.append("range_m,mag_db")
        lines += [f"{r:.17g},{m:.17g}" for r, m in zip(self.ranges_m, self.magnitude_db)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def range_profile(sweep: SweepResult, pol: str = "VV", window: str = "hann", zero_pad: int = 4) -> RangeProfile:
    """Monostatic range profile (dB of amplitude) of one polarization channel."""
    df = uniform_step(sweep.frequencies)
    rx, tx = pol[0], pol[-1]
    ranges, spec = axis_transform(sweep.pol(rx, tx), df, window, zero_pad)
    mag = 20.0 * np.log10(np.maximum(np.abs(spec), 1e-300))
    return RangeProfile(ranges, mag, window, int(zero_pad), spec)


@dataclass
class IsarImage:
    down_range_m: np.ndarray
    cross_range_m: np.ndarray
    db: np.ndarray            # (down-range, cross-range), 0 dB at the image peak
    floor_db: float
    window: str

    @property
    def extent(self):
        return (float(self.down_range_m[0]), float(self.down_range_m[-1]),
                float(self.cross_range_m[0]), float(self.cross_range_m[-1]))

    def peak_positions(self, count: int, min_separation_m: float = 0.5):
        """``(down, cross)`` of the ``count`` strongest separated local maxima."""
        d = self.db
        pad = np.pad(d, 1, constant_values=-np.inf)
        core = pad[1:-1, 1:-1]
        is_max = np.ones_like(core, bool)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di or dj:
                    is_max &= core >= pad[1 + di:pad.shape[0] - 1 + di, 1 + dj:pad.shape[1] - 1 + dj]
        idx = np.argwhere(is_max & (core > self.floor_db))
        idx = idx[np.argsort(-core[idx[:, 0], idx[:, 1]])]
        out: list[tuple[float, float]] = []
        for i, j in idx:
            p = (float(self.down_range_m[i]), float(self.cross_range_m[j]))
            if all(np.hypot(p[0] - q[0], p[1] - q[1]) >= min_separation_m for q in out):
                out.append(p)
            if len(out) == count:
                break
        return out

    def to_csv(self, path=None, header: str | None = None) -> str:
        lines = [f"# {header}"] if header else []
        lines.append(f"# floor_db={self.floor_db} window={self.window}")
        lines.append("down_range_m\\cross_range_m," + ",".join(f"{c:.17g}" for c in self.cross_range_m))
        for r, row in zip(self.down_range_m, self.db):
            lines.append(f"{r:.17g}," + ",".join(f"{v:.17g}" for v in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_pgm(self, path=None, header: str | None = None) -> bytes:
        """8-bit binary graymap: floor -> 0, 0 dB -> 255; top row is the farthest down-range."""
        scaled = np.round((self.db - self.floor_db) / (-self.floor_db) * 255.0)
        pixels = np.clip(scaled, 0, 255).astype(np.uint8)[::-1]
        h, w = pixels.shape
        comments = f"# dB window {self.floor_db:g} to 0\n"
        if header:
            comments += f"# {header}\n"
        data = f"P5\n{comments}{w} {h}\n255\n".encode() + pixels.tobytes()
        if path is not None:
            Path(path).write_bytes(data)
        return data


def isar(sweeps: list[SweepResult], angles_deg, pol: str = "VV", window: str = "hann",
         floor_db: float = -40.0, zero_pad: int = 2) -> IsarImage:
    """Small-angle range-Doppler ISAR image from a frequency x aspect-angle matrix.

    The angular axis is transformed like the frequency axis with an
    equivalent step ``f_c * d_angle``, which places a scatterer at its
    cross-range coordinate (the component along the direction of increasing
    aspect angle at the aperture centre).
    """
    angles = np.asarray(angles_deg, dtype=float)
    if len(sweeps) != len(angles):
        raise GridError("need one sweep per angle")
    span = float(angles.max() - angles.min())
    if span > MAX_APERTURE_DEG:
        raise GridError(f"angular aperture {span:g} deg exceeds the {MAX_APERTURE_DEG:g} deg small-angle limit")
    dang = np.radians(uniform_step(angles, "angle"))
    freqs = sweeps[0].frequencies
    df = uniform_step(freqs)
    rx, tx = pol[0], pol[-1]
    data = np.stack([s.pol(rx, tx) for s in sweeps], axis=1)  # (F, A)
    fc = 0.5 * (freqs[0] + freqs[-1])
    down, spec = axis_transform(data, df, window, zero_pad, axis=0)
    cross, spec = axis_transform(spec, fc * dang, window, zero_pad, axis=1)
    mag = np.abs(spec)
    db = 20.0 * np.log10(np.maximum(mag / max(mag.max(), 1e-300), 1e-300))
    return IsarImage(down, cross, np.maximum(db, floor_db), float(floor_db), window)


def cross_range_resolution(fc: float, aperture_deg: float) -> float:
    return C0 / (2.0 * fc * np.radians(aperture_deg))
