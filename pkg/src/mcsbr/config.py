"""Experiment configuration files (YAML) with path-qualified validation errors.

Example::

    scene:
      builtin: glass_cube          # or  mesh: cube.obj  +  materials: cube.yaml
      params: {size: 3.0}
    source: {theta_deg: 0.0, phi_deg: 0.0}
    receiver: {monostatic: true}
    frequency: {start_hz: 1.0e9, stop_hz: 3.0e9, count: 101}
    solver: mc
    mc: {strata_per_wavelength: 10, samples_per_stratum: 16, seed: 1}
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .geometry import Scene, load_scene
from .scenes import SCENE_NAMES, scene_texts
from .solver_det import DetConfig
from .solver_mc import McConfig, RouletteConfig
from .tracing import Illumination


class ConfigError(ValueError):
    """Schema violation; the message starts with the offending field path."""


@dataclass
class SceneConfig:
    builtin: str | None = None
    params: dict = field(default_factory=dict)
    mesh: str | None = None
    materials: str | None = None


@dataclass
class SourceConfig:
    theta_deg: float = 0.0
    phi_deg: float = 0.0
    polarization: str = "V"     # channel reported first in summaries; both are always traced


@dataclass
class ReceiverConfig:
    monostatic: bool = True
    theta_deg: float | None = None
    phi_deg: float | None = None
    polarizations: list = field(default_factory=lambda: ["V", "H"])


@dataclass
class FrequencyConfig:
    start_hz: float = 1.0e9
    stop_hz: float = 3.0e9
    count: int = 101

    def grid(self) -> np.ndarray:
        return np.linspace(self.start_hz, self.stop_hz, self.count)


@dataclass
class AngleSweepConfig:
    axis: str = "theta"
    start_deg: float = 0.0
    stop_deg: float = 0.0
    count: int = 1
    frequency_hz: float = 3.0e9

    def grid(self) -> np.ndarray:
        return np.linspace(self.start_deg, self.stop_deg, self.count)


@dataclass
class ProfileConfig:
    pol: str = "VV"
    window: str = "hann"
    zero_pad: int = 4


@dataclass
class IsarConfig:
    pol: str = "VV"
    window: str = "hann"
    floor_db: float = -40.0
    zero_pad: int = 2
    start_deg: float = 80.0
    stop_deg: float = 100.0
    count: int = 51


@dataclass
class ConvergenceConfig:
    strata_per_wavelength: list = field(default_factory=lambda: [2.5, 5.0, 10.0])
    samples_per_stratum: list = field(default_factory=lambda: [1, 4, 16])
    seeds: int = 10
    reference_rays_per_wavelength: float = 40.0


@dataclass
class BenchConfig:
    repeats: int = 3
    warmups: int = 1
    max_bounce: list = field(default_factory=lambda: [9])
    mc_strata_per_wavelength: float = 10.0
    mc_samples_per_stratum: int = 4
    det_rays_per_wavelength: float = 20.0
    force_stack_accounting: bool = True


@dataclass
class OracleConfig:
    kind: str = "slab"                         # slab | plate | sphere
    layers: list = field(default_factory=lambda: [[1.5 ** 0.5, 3.0]])
    pec_backed: bool = False
    plate_a_m: float = 1.0
    plate_b_m: float = 1.0
    sphere_radius_m: float = 1.0


@dataclass
class OutputConfig:
    sweep_csv: str = "sweep.csv"
    angle_sweep_csv: str = "angle_sweep.csv"
    profile_csv: str = "profile.csv"
    isar_csv: str = "isar.csv"
    isar_pgm: str = "isar.pgm"
    stats_json: str = "stats.json"
    manifest_json: str = "manifest.json"


@dataclass
class ExperimentConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    receiver: ReceiverConfig = field(default_factory=ReceiverConfig)
    frequency: FrequencyConfig = field(default_factory=FrequencyConfig)
    solver: str = "mc"
    mc: McConfig = field(default_factory=McConfig)
    deterministic: DetConfig = field(default_factory=DetConfig)
    angle_sweep: AngleSweepConfig = field(default_factory=AngleSweepConfig)
    range_profile: ProfileConfig = field(default_factory=ProfileConfig)
    isar: IsarConfig = field(default_factory=IsarConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = "."

    # -- derived -----------------------------------------------------------

    def illumination(self, theta_deg: float | None = None, phi_deg: float | None = None) -> Illumination:
        th = self.source.theta_deg if theta_deg is None else theta_deg
        ph = self.source.phi_deg if phi_deg is None else phi_deg
        if self.receiver.monostatic:
            return Illumination.monostatic(th, ph)
        return Illumination.bistatic(th, ph, self.receiver.theta_deg, self.receiver.phi_deg)

    def scene_texts(self) -> tuple[str, str]:
        s = self.scene
        if s.builtin:
            return scene_texts(s.builtin, **s.params)
        base = Path(self.base_dir)
        return (base / s.mesh).read_text(), (base / s.materials).read_text()

    def load_scene(self) -> Scene:
        return load_scene(*self.scene_texts())

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def config_hash(self) -> str:
        """SHA-256 over the resolved config and the scene file contents.

        Worker counts are excluded: they never change results.
        """
        d = self.to_dict()
        d["mc"].pop("workers")
        d["deterministic"].pop("workers")
        mesh, mats = self.scene_texts()
        d["_scene_sha256"] = hashlib.sha256((mesh + "\0" + mats).encode()).hexdigest()
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


_NESTED = {
    ExperimentConfig: {
        "scene": SceneConfig, "source": SourceConfig, "receiver": ReceiverConfig,
        "frequency": FrequencyConfig, "mc": McConfig, "deterministic": DetConfig,
        "angle_sweep": AngleSweepConfig, "range_profile": ProfileConfig, "isar": IsarConfig,
        "convergence": ConvergenceConfig, "bench": BenchConfig, "oracle": OracleConfig,
        "outputs": OutputConfig,
    },
    McConfig: {"roulette": RouletteConfig},
}


def _coerce(value, annotation: str, path: str):
    ann = str(annotation)
    if ann.startswith("float"):
        if value is None and "None" in ann:
            return None
        if isinstance(value, str):
            # YAML 1.1 reads exponents without a sign (1.0e9) as strings
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if ann.startswith("int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if ann == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if ann.startswith("str"):
        if value is None and "None" in ann:
            return None
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if ann == "list" and not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list, got {value!r}")
    if ann == "dict" and not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping, got {value!r}")
    return value


def _build(cls, data: Any, path: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or '<root>'}: expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = f"{path}.{key}" if path else key
        if key not in known or key == "base_dir":
            raise ConfigError(f"{sub}: unknown field")
        nested = _NESTED.get(cls, {}).get(key)
        kwargs[key] = _build(nested, value, sub) if nested else _coerce(value, known[key].type, sub)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path or '<root>'}: {exc}") from exc


def parse_config(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<root>: not valid YAML ({exc})") from exc
    cfg = _build(ExperimentConfig, data or {}, "")
    cfg.base_dir = str(base_dir)
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"<file>: config file {str(p)!r} does not exist")
    return parse_config(p.read_text(), p.parent)


def _validate(cfg: ExperimentConfig) -> None:
    s = cfg.scene
    if s.builtin is None and (s.mesh is None or s.materials is None):
        raise ConfigError("scene: give either builtin or both mesh and materials")
    if s.builtin is not None and s.builtin not in SCENE_NAMES:
        raise ConfigError(f"scene.builtin: unknown scene {s.builtin!r}")
    for key in ("mesh", "materials"):
        rel = getattr(s, key)
        if rel is not None and not (Path(cfg.base_dir) / rel).exists():
            raise ConfigError(f"scene.{key}: file {rel!r} does not exist")
    if not 0.0 <= cfg.source.theta_deg <= 180.0:
        raise ConfigError("source.theta_deg: must lie in [0, 180]")
    if cfg.source.polarization not in ("V", "H"):
        raise ConfigError("source.polarization: must be V or H")
    if not cfg.receiver.monostatic and (cfg.receiver.theta_deg is None or cfg.receiver.phi_deg is None):
        raise ConfigError("receiver: bistatic receivers need theta_deg and phi_deg")
    f = cfg.frequency
    if f.count < 1:
        raise ConfigError("frequency.count: must be >= 1")
    if not (f.start_hz > 0 and f.stop_hz >= f.start_hz) or (f.count > 1 and f.stop_hz == f.start_hz):
        raise ConfigError("frequency: need 0 < start_hz < stop_hz (or count 1)")
    if cfg.solver not in ("mc", "deterministic"):
        raise ConfigError("solver: must be mc or deterministic")
    if cfg.angle_sweep.axis not in ("theta", "phi"):
        raise ConfigError("angle_sweep.axis: must be theta or phi")
    if cfg.angle_sweep.count < 1:
        raise ConfigError("angle_sweep.count: must be >= 1")
    if cfg.isar.count < 2:
        raise ConfigError("isar.count: must be >= 2")
    if cfg.oracle.kind not in ("slab", "plate", "sphere"):
        raise ConfigError("oracle.kind: must be slab, plate or sphere")
