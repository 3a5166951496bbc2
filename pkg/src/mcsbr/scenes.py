"""Parameterized test scenes written as OBJ + YAML material map pairs."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import yaml

from .geometry import Scene, SceneError, load_scene

SCENE_NAMES = (
    "plate", "sphere", "pec_cube", "dihedral", "glass_cube",
    "glass_cube_pec_bottom", "nested", "airplane_stub",
)


class MeshBuilder:
    """Accumulates triangles under named groups."""

    def __init__(self):
        self.vertices: list[np.ndarray] = []
        self.faces: list[tuple[int, int, int]] = []
        self.groups: list[str] = []

    def add(self, verts, faces, group: str):
        base = len(self.vertices)
        self.vertices.extend(np.asarray(verts, dtype=float))
        for f in faces:
            self.faces.append(tuple(int(i) + base for i in f))
            self.groups.append(group)
        return self

    def obj_text(self) -> str:
        out = io.StringIO()
        for v in self.vertices:
            out.write("v {:.17g} {:.17g} {:.17g}\n".format(*v))
        current = None
        for f, g in zip(self.faces, self.groups):
            if g != current:
                out.write(f"g {g}\n")
                current = g
            out.write("f {} {} {}\n".format(*(i + 1 for i in f)))
        return out.getvalue()


# ---------------------------------------------------------------------------
# primitives (all closed shells have outward-facing normals)


def box(center, size):
    c = np.asarray(center, dtype=float)
    h = 0.5 * np.broadcast_to(np.asarray(size, dtype=float), (3,))
    signs = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
    verts = c + signs * h
    # vertex index = 4*ix + 2*iy + iz
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    faces = []
    for a, b, c_, d in quads:
        faces += [(a, b, c_), (a, c_, d)]
    return verts, faces


def box_faces_by_side(center, size):
    """Like :func:`box` but returns ``{side: faces}`` with sides ``-x, +x, ...``."""
    verts, faces = box(center, size)
    names = ["-x", "+x", "-y", "+y", "-z", "+z"]
    return verts, {n: faces[2 * i: 2 * i + 2] for i, n in enumerate(names)}


def icosphere(radius=1.0, subdivisions=3, center=(0.0, 0.0, 0.0)):
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.asarray(center, dtype=float) + radius * np.array(verts), faces


def _ccw(poly):
    p = np.asarray(poly, dtype=float)
    area2 = np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1])
    return p if area2 > 0 else p[::-1]


def prism(polygon_xy, z0, z1, axes=(0, 1, 2)):
    """Extrude a convex CCW polygon between heights ``z0 < z1``.

    ``axes`` maps (polygon-u, polygon-v, extrusion) onto world axes; it must
    be an even permutation of (0, 1, 2) to keep normals outward.
    """
    poly = np.asarray(polygon_xy, dtype=float)
    n = len(poly)
    verts = np.zeros((2 * n, 3))
    for k, (u, v) in enumerate(poly):
        for layer, z in enumerate((z0, z1)):
            p = np.zeros(3)
            p[axes[0]], p[axes[1]], p[axes[2]] = u, v, z
            verts[k + layer * n] = p
    faces = []
    for k in range(1, n - 1):
        faces.append((0, k + 1, k))              # bottom, facing -extrusion
        faces.append((n, n + k, n + k + 1))      # top
    for k in range(n):
        j = (k + 1) % n
        faces += [(k, j, n + j), (k, n + j, n + k)]
    return verts, faces


# ---------------------------------------------------------------------------
# scene definitions


def _materials(**extra):
    mats = {"air": {"eps_r": 1.0}}
    mats.update(extra)
    return mats


def _map_text(materials, groups) -> str:
    return yaml.safe_dump({"ambient": "air", "materials": materials, "groups": groups}, sort_keys=False)


def plate(size=1.0, z=0.0):
    a = 0.5 * size
    verts = [(-a, -a, z), (a, -a, z), (a, a, z), (-a, a, z)]
    mb = MeshBuilder().add(verts, [(0, 1, 2), (0, 2, 3)], "plate")
    return mb.obj_text(), _map_text(
        _materials(), {"plate": {"front": "air", "back": "air", "pec_sheet": True}})


def sphere(radius=1.0, subdivisions=4):
    v, f = icosphere(radius, subdivisions)
    mb = MeshBuilder().add(v, f, "sphere")
    return mb.obj_text(), _map_text(
        _materials(metal={"pec": True}), {"sphere": {"front": "air", "back": "metal"}})


def pec_cube(size=1.0):
    v, f = box((0, 0, 0), size)
    mb = MeshBuilder().add(v, f, "cube")
    return mb.obj_text(), _map_text(
        _materials(metal={"pec": True}), {"cube": {"front": "air", "back": "metal"}})


def dihedral(size=1.0, width=1.0):
    """Right-angle corner reflector: seam along y through the origin, opening toward +z."""
    s = size / np.sqrt(2.0)
    w = 0.5 * width
    verts = [(0, -w, 0), (0, w, 0), (s, w, s), (s, -w, s), (-s, w, s), (-s, -w, s)]
    mb = MeshBuilder()
    mb.add(verts, [(0, 1, 2), (0, 2, 3)], "wall_a")
    mb.add(verts, [(0, 5, 4), (0, 4, 1)], "wall_b")
    sheet = {"front": "air", "back": "air", "pec_sheet": True}
    return mb.obj_text(), _map_text(_materials(), {"wall_a": sheet, "wall_b": sheet})


def glass_cube(size=3.0, eps_r=1.5, center=(0.0, 0.0, 0.0)):
    v, f = box(center, size)
    mb = MeshBuilder().add(v, f, "shell")
    return mb.obj_text(), _map_text(
        _materials(glass={"eps_r": float(eps_r)}), {"shell": {"front": "air", "back": "glass"}})


def glass_cube_pec_bottom(size=3.0, eps_r=1.5, center=(0.0, 0.0, 0.0)):
    """Glass cube whose -z face is a conductor (PEC-backed slab at normal incidence from +z)."""
    v, sides = box_faces_by_side(center, size)
    mb = MeshBuilder()
    mb.add(v, [f for k, fs in sides.items() if k != "-z" for f in fs], "shell")
    mb.add(v, sides["-z"], "bottom")
    return mb.obj_text(), _map_text(
        _materials(glass={"eps_r": float(eps_r)}),
        {"shell": {"front": "air", "back": "glass"},
         "bottom": {"front": "air", "back": "glass", "pec_sheet": True}})


def nested(outer=3.0, inner=2.0, sphere_radius=0.5, eps_outer=1.5, eps_inner=2.0, subdivisions=2):
    mb = MeshBuilder()
    mb.add(*box((0, 0, 0), outer), "outer")
    mb.add(*box((0, 0, 0), inner), "inner")
    mb.add(*icosphere(sphere_radius, subdivisions), "core")
    return mb.obj_text(), _map_text(
        _materials(glass={"eps_r": float(eps_outer)}, dense_glass={"eps_r": float(eps_inner)},
                   metal={"pec": True}),
        {"outer": {"front": "air", "back": "glass"},
         "inner": {"front": "glass", "back": "dense_glass"},
         "core": {"front": "dense_glass", "back": "metal"}})


def airplane_stub(length=7.0, span=7.0, fin_height=1.5):
    """Gross-dimension airplane: box fuselage along x, swept wings along y, vertical fin.

    Each component is a separate closed conductor; they interpenetrate at
    the roots, which is harmless for exterior scattering.
    """
    mb = MeshBuilder()
    body = 0.8
    mb.add(*box((0, 0, 0), (length, body, body)), "fuselage")
    half = 0.5 * span
    chord, sweep, thick = 1.6, 1.2, 0.1
    for side, name in ((1, "wing_right"), (-1, "wing_left")):
        # planform in (x, y); CCW seen from +z
        root_le, root_te = 0.8, 0.8 - chord
        tip_le, tip_te = root_le - sweep, root_le - sweep - 0.6 * chord
        # roots overlap inside the fuselage but never share edges
        root_y = -0.1 * side
        quad = [(root_te, root_y), (tip_te, side * half), (tip_le, side * half), (root_le, root_y)]
        mb.add(*prism(_ccw(quad), -0.5 * thick, 0.5 * thick), name)
    # fin polygon in (z, x), extruded along y
    x_back = -0.5 * length
    fin = [(0.0, x_back + 1.6), (0.0, x_back), (fin_height + 0.5 * body, x_back + 0.2),
           (fin_height + 0.5 * body, x_back + 0.9)]
    mb.add(*prism(_ccw(fin), -0.05, 0.05, axes=(2, 0, 1)), "fin")
    pec = {"front": "air", "back": "metal"}
    return mb.obj_text(), _map_text(
        _materials(metal={"pec": True}),
        {"fuselage": pec, "wing_right": pec, "wing_left": pec, "fin": pec})


_BUILDERS = {
    "plate": plate, "sphere": sphere, "pec_cube": pec_cube, "dihedral": dihedral,
    "glass_cube": glass_cube, "glass_cube_pec_bottom": glass_cube_pec_bottom,
    "nested": nested, "airplane_stub": airplane_stub,
}


def scene_texts(name: str, **params) -> tuple[str, str]:
    """``(obj_text, material_map_text)`` for a builtin scene."""
    if name not in _BUILDERS:
        raise SceneError(f"unknown builtin scene {name!r}; choose from {', '.join(SCENE_NAMES)}")
    return _BUILDERS[name](**params)


def builtin_scene(name: str, **params) -> Scene:
    return load_scene(*scene_texts(name, **params))


def write_builtin(name: str, out_dir, **params) -> tuple[Path, Path]:
    """Write ``<name>.obj`` and ``<name>.materials.yaml`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    obj, mat = scene_texts(name, **params)
    mesh_path, map_path = out / f"{name}.obj", out / f"{name}.materials.yaml"
    mesh_path.write_text(obj)
    map_path.write_text(mat)
    return mesh_path, map_path
