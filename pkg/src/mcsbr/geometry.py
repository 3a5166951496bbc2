"""Triangle-mesh scenes with two-sided material tagging.

A scene is a Wavefront OBJ mesh whose ``g``/``o`` groups are bound to
materials by a YAML sidecar::

    ambient: air
    materials:
      air:   {eps_r: 1.0}
      glass: {eps_r: 1.5}
      metal: {pec: true}
    groups:
      shell:  {front: air, back: glass}       # front = side the normal points to
      bottom: {front: air, back: glass, pec_sheet: true}
      plate:  {front: air, back: air, pec_sheet: true}

A ``pec_sheet`` group is an infinitely thin conductor: rays reflect off it
from either side. A closed conductor is tagged with a PEC material on its
inner side instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import bvh as _bvh
from .emmath import Material, normalize


class SceneError(ValueError):
    """Invalid mesh or material map."""


# ---------------------------------------------------------------------------
# parsing


def parse_obj(text: str):
    """Parse OBJ text into ``(vertices, faces, group_per_face)``.

    Polygons are fan-triangulated; ``v/vt/vn`` index forms and negative
    indices are accepted.
    """
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    groups: list[str] = []
    group = "default"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        if tag == "v":
            if len(rest) < 3:
                raise SceneError(f"line {lineno}: vertex needs 3 coordinates")
            verts.append([float(x) for x in rest[:3]])
        elif tag in ("g", "o"):
            group = rest[0] if rest else "default"
        elif tag == "f":
            idx = []
            for tok in rest:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if len(idx) < 3:
                raise SceneError(f"line {lineno}: face needs at least 3 vertices")
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
                groups.append(group)
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3), groups


def write_obj(path, vertices, faces, groups) -> None:
    """Write a triangle mesh with one ``g`` block per contiguous group."""
    lines = []
    for v in vertices:
        lines.append("v {:.17g} {:.17g} {:.17g}".format(*v))
    current = None
    for f, g in zip(faces, groups):
        if g != current:
            lines.append(f"g {g}")
            current = g
        lines.append("f {} {} {}".format(*(int(i) + 1 for i in f)))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# scene


@dataclass
class Scene:
    vertices: np.ndarray
    triangles: np.ndarray
    front: np.ndarray           # material index on the normal side
    back: np.ndarray
    pec_sheet: np.ndarray
    materials: list[Material]
    ambient: int
    group_names: list[str] = field(default_factory=list)
    tri_group: np.ndarray | None = None

    def __post_init__(self):
        v = self.vertices[self.triangles]
        self.v0 = np.ascontiguousarray(v[:, 0])
        self.e1 = np.ascontiguousarray(v[:, 1] - v[:, 0])
        self.e2 = np.ascontiguousarray(v[:, 2] - v[:, 0])
        cross = np.cross(self.e1, self.e2)
        self.areas = 0.5 * np.linalg.norm(cross, axis=1)
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        self.center = 0.5 * (lo + hi)
        self.radius = float(np.max(np.linalg.norm(self.vertices - self.center, axis=1))) if len(self.vertices) else 0.0
        bad = np.flatnonzero(self.areas <= 1e-12 * max(self.radius, 1.0) ** 2)
        if len(bad):
            raise SceneError(f"degenerate (zero-area) triangle {int(bad[0])}")
        self.normals = cross / (2.0 * self.areas[:, None])
        idx = np.array([m.n if not m.is_pec else np.inf for m in self.materials])
        mu = np.array([m.mu_r if not m.is_pec else 1.0 for m in self.materials])
        pec = np.array([m.is_pec for m in self.materials])
        self.mat_n = idx
        self.mat_mu = mu
        self.mat_pec = pec
        amb = self.materials[self.ambient]
        if amb.is_pec or abs(amb.eps_r - 1.0) > 1e-12 or abs(amb.mu_r - 1.0) > 1e-12:
            raise SceneError("ambient medium must be free space (eps_r = mu_r = 1)")
        self.bvh = _bvh.build_bvh(self.v0, self.v0 + self.e1, self.v0 + self.e2)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def eps(self) -> float:
        """Self-intersection offset, ``1e-6`` of the scene diameter."""
        return 1e-6 * max(self.diameter, 1e-9)

    @property
    def ambient_n(self) -> float:
        return self.materials[self.ambient].n

    def material_index(self, name: str) -> int:
        for i, m in enumerate(self.materials):
            if m.name == name:
                return i
        raise SceneError(f"unknown material {name!r}")


def _validate_closed_regions(scene: Scene) -> None:
    """Parity-consistency walk over every non-ambient region.

    Each region's boundary triangles are oriented with the region on their
    back side; the result must be a closed, consistently oriented surface:
    every directed edge appears once and its reverse appears once.
    Vertices are welded by position first so unwelded meshes are accepted.
    """
    scale = max(scene.radius, 1.0)
    keys = np.round(scene.vertices / (1e-9 * scale)).astype(np.int64)
    _, weld = np.unique(keys, axis=0, return_inverse=True)
    weld = weld.reshape(-1)
    tris = weld[scene.triangles]
    for region in range(len(scene.materials)):
        if region == scene.ambient:
            continue
        on_back = scene.back == region
        on_front = scene.front == region
        both = on_back & on_front
        if np.any(both & ~scene.pec_sheet):
            t = int(np.flatnonzero(both)[0])
            raise SceneError(f"triangle {t}: material {scene.materials[region].name!r} on both sides")
        sel = (on_back | on_front) & ~both
        if not np.any(sel):
            continue
        oriented = tris[sel].copy()
        flip = on_front[sel]
        oriented[flip] = oriented[flip][:, ::-1]
        ids = np.flatnonzero(sel)
        edges = np.concatenate([oriented[:, [0, 1]], oriented[:, [1, 2]], oriented[:, [2, 0]]])
        owner = np.concatenate([ids, ids, ids])
        fwd = {}
        for (a, b), t in zip(map(tuple, edges), owner):
            if (a, b) in fwd:
                raise SceneError(
                    f"non-manifold boundary of region {scene.materials[region].name!r} at triangle {int(t)}"
                )
            fwd[(a, b)] = t
        for (a, b), t in fwd.items():
            if (b, a) not in fwd:
                raise SceneError(
                    f"open or inconsistently oriented boundary of region "
                    f"{scene.materials[region].name!r} at triangle {int(t)}"
                )


def load_scene(mesh_text: str, material_map_text: str, validate: bool = True) -> Scene:
    """Build a :class:`Scene` from OBJ text and a YAML material map."""
    verts, faces, groups = parse_obj(mesh_text)
    if len(faces) == 0:
        raise SceneError("mesh has no faces")
    if faces.min() < 0 or faces.max() >= len(verts):
        bad = int(np.flatnonzero((faces < 0).any(1) | (faces >= len(verts)).any(1))[0])
        raise SceneError(f"triangle {bad} references a missing vertex")

    spec = yaml.safe_load(material_map_text) or {}
    mats_spec = spec.get("materials") or {}
    if not mats_spec:
        raise SceneError("material map defines no materials")
    materials, index = [], {}
    for name, props in mats_spec.items():
        props = props or {}
        index[name] = len(materials)
        materials.append(Material(
            name=name,
            eps_r=float(props.get("eps_r", 1.0)),
            mu_r=float(props.get("mu_r", 1.0)),
            is_pec=bool(props.get("pec", False)),
        ))
    ambient_name = spec.get("ambient", "air")
    if ambient_name not in index:
        raise SceneError(f"unknown material {ambient_name!r} (ambient)")

    group_spec = spec.get("groups") or {}
    n = len(faces)
    front = np.empty(n, dtype=np.int64)
    back = np.empty(n, dtype=np.int64)
    sheet = np.zeros(n, dtype=bool)
    group_names = sorted(set(groups))
    gid = {g: i for i, g in enumerate(group_names)}
    for g in group_names:
        if g not in group_spec:
            raise SceneError(f"mesh group {g!r} has no entry in the material map")
    for i, g in enumerate(groups):
        entry = group_spec[g]
        for side, arr in (("front", front), ("back", back)):
            name = entry.get(side, ambient_name)
            if name not in index:
                raise SceneError(f"unknown material {name!r} (group {g!r}, triangle {i})")
            arr[i] = index[name]
        sheet[i] = bool(entry.get("pec_sheet", False))

    scene = Scene(
        vertices=verts, triangles=faces, front=front, back=back, pec_sheet=sheet,
        materials=materials, ambient=index[ambient_name], group_names=group_names,
        tri_group=np.array([gid[g] for g in groups], dtype=np.int64),
    )
    if validate:
        _validate_closed_regions(scene)
    return scene


def load_scene_files(mesh_path, material_map_path, validate: bool = True) -> Scene:
    return load_scene(Path(mesh_path).read_text(), Path(material_map_path).read_text(), validate=validate)


# ---------------------------------------------------------------------------
# ray queries


@dataclass
class Hit:
    """Batch of ray/surface intersections.

    ``normal`` faces the incoming ray. ``n_incident``/``n_transmit`` are the
    refractive indices on the ray's side and the far side (``inf`` when the
    far side is a conductor).
    """

    t: np.ndarray
    point: np.ndarray
    normal: np.ndarray
    triangle: np.ndarray
    near: np.ndarray            # material index on the ray's side
    far: np.ndarray
    n_incident: np.ndarray
    n_transmit: np.ndarray
    mu_incident: np.ndarray
    mu_transmit: np.ndarray
    far_side_pec: np.ndarray
    near_ambient: np.ndarray
    far_ambient: np.ndarray

    @property
    def exterior_facing(self) -> np.ndarray:
        return self.near_ambient | (self.far_ambient & ~self.far_side_pec)

    def __len__(self) -> int:
        return len(self.t)

    def take(self, idx) -> "Hit":
        return Hit(**{k: getattr(self, k)[idx] for k in self.__dataclass_fields__})

    @property
    def nbytes(self) -> int:
        return sum(getattr(self, k).nbytes for k in self.__dataclass_fields__)


def cast(scene: Scene, origins, dirs, t_min=0.0):
    """Raw nearest-hit query: ``(t, triangle)`` with ``(inf, -1)`` on miss."""
    return _bvh.cast_rays(scene.bvh, scene.v0, scene.e1, scene.e2, origins, dirs, t_min)


def intersect(scene: Scene, origins, dirs, t_min=0.0):
    """Nearest hit per ray with ``t > t_min``.

    Returns ``(hit_mask, Hit)`` where the :class:`Hit` batch covers only the
    rays that hit something.
    """
    origins = np.asarray(origins, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    t, tri = cast(scene, origins, dirs, t_min)
    mask = tri >= 0
    return mask, make_hit(scene, origins[mask], dirs[mask], t[mask], tri[mask])


def make_hit(scene: Scene, origins, dirs, t, tri) -> Hit:
    geo_n = scene.normals[tri]
    from_front = np.einsum("ij,ij->i", dirs, geo_n) < 0
    normal = np.where(from_front[:, None], geo_n, -geo_n)
    near = np.where(from_front, scene.front[tri], scene.back[tri])
    far = np.where(from_front, scene.back[tri], scene.front[tri])
    far_pec = scene.pec_sheet[tri] | scene.mat_pec[far]
    return Hit(
        t=t,
        point=origins + t[:, None] * dirs,
        normal=normal,
        triangle=tri,
        near=near,
        far=far,
        n_incident=scene.mat_n[near],
        n_transmit=np.where(far_pec, np.inf, scene.mat_n[far]),
        mu_incident=scene.mat_mu[near],
        mu_transmit=scene.mat_mu[far],
        far_side_pec=far_pec,
        near_ambient=near == scene.ambient,
        far_ambient=far == scene.ambient,
    )


def occluded(scene: Scene, points, dirs) -> np.ndarray:
    """True where a ray from ``points`` along ``dirs`` hits anything beyond the self-intersection offset."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dirs = np.broadcast_to(np.asarray(dirs, dtype=float), points.shape)
    t, tri = _bvh.cast_rays(scene.bvh, scene.v0, scene.e1, scene.e2, points, dirs, scene.eps, any_hit=True)
    return tri >= 0


def intersect_brute(scene: Scene, origins, dirs, t_min=0.0):
    """All-triangle reference query (used as a test oracle)."""
    return _bvh.cast_rays_brute(scene.v0, scene.e1, scene.e2, origins, dirs, t_min)


# ---------------------------------------------------------------------------
# launch plane


@dataclass
class LaunchRect:
    center: np.ndarray
    u_axis: np.ndarray
    v_axis: np.ndarray
    half_extents: tuple[float, float]
    normal: np.ndarray  # the incidence direction

    @property
    def area(self) -> float:
        a, b = self.half_extents
        return 4.0 * a * b

    def point(self, su, sv):
        """Map coordinates in ``[0, 1]^2`` to 3D points on the rect."""
        a, b = self.half_extents
        su = np.asarray(su, dtype=float)
        sv = np.asarray(sv, dtype=float)
        return (self.center + ((2 * su - 1) * a)[..., None] * self.u_axis
                + ((2 * sv - 1) * b)[..., None] * self.v_axis)


def transverse_axes(k):
    """A fixed right-handed pair ``(u, v)`` orthogonal to ``k``."""
    k = normalize(k)
    ref = np.array([0.0, 0.0, 1.0]) if abs(k[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = normalize(ref - np.dot(ref, k) * k)
    v = np.cross(k, u)
    return u, v


def launch_rect(scene: Scene, k_inc, padding: float = 0.0) -> LaunchRect:
    """Bounding rectangle of the scene's projection on the plane orthogonal to ``k_inc``.

    The rect sits upstream of the scene, outside its bounding sphere, and
    is grown by ``padding`` on every side.
    """
    k = normalize(np.asarray(k_inc, dtype=float))
    u, v = transverse_axes(k)
    pu = scene.vertices @ u
    pv = scene.vertices @ v
    cu, cv = 0.5 * (pu.min() + pu.max()), 0.5 * (pv.min() + pv.max())
    a = 0.5 * (pu.max() - pu.min()) + padding
    b = 0.5 * (pv.max() - pv.min()) + padding
    if a <= 0 or b <= 0:
        raise SceneError("scene projects to a degenerate launch rectangle")
    standoff = float(np.dot(scene.center, k)) - scene.radius - max(1e-3 * scene.diameter, 1e-6)
    center = cu * u + cv * v + standoff * k
    return LaunchRect(center=center, u_axis=u, v_axis=v, half_extents=(float(a), float(b)), normal=k)
