import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsbr import scenes
from mcsbr.geometry import (
    SceneError, cast, intersect, intersect_brute, launch_rect, load_scene, occluded, parse_obj,
)

CUBE_MAP = """
ambient: air
materials:
  air: {}
  glass: {eps_r: 1.5}
groups:
  shell: {front: air, back: glass}
"""


def _random_rays(scene, n, rng):
    origins = scene.center + rng.normal(size=(n, 3)) * scene.radius * 1.5
    targets = scene.center + rng.normal(size=(n, 3)) * scene.radius * 0.5
    dirs = targets - origins
    return origins, dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


@pytest.mark.parametrize("name", ["nested", "sphere", "dihedral", "airplane_stub"])
def test_bvh_matches_brute_force(name, rng):
    scene = scenes.builtin_scene(name)
    o, d = _random_rays(scene, 20000, rng)
    t1, tri1 = cast(scene, o, d)
    t2, tri2 = intersect_brute(scene, o, d)
    assert np.array_equal(tri1, tri2)
    assert np.array_equal(np.isinf(t1), np.isinf(t2))
    hit = np.isfinite(t1)
    assert np.allclose(t1[hit], t2[hit], rtol=0, atol=1e-12)
    assert (tri1 >= 0).sum() > 1000


def test_parse_obj_handles_quads_groups_and_negative_indices():
    text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\ng top\nf -4/1/1 -3/2/2 -2/3/3 -1/4/4\n"
    verts, faces, groups = parse_obj(text)
    assert len(verts) == 4
    assert faces.tolist() == [[0, 1, 2], [0, 2, 3]]
    assert groups == ["top", "top"]


def test_every_builtin_scene_loads():
    for name in scenes.SCENE_NAMES:
        scene = scenes.builtin_scene(name)
        assert scene.n_triangles > 0


def test_open_region_is_rejected():
    mesh, _ = scenes.scene_texts("glass_cube")
    lines = mesh.splitlines()
    last_face = max(i for i, l in enumerate(lines) if l.startswith("f "))
    del lines[last_face]
    with pytest.raises(SceneError, match="glass"):
        load_scene("\n".join(lines), CUBE_MAP)


def test_unknown_material_and_missing_group():
    mesh, _ = scenes.scene_texts("glass_cube")
    with pytest.raises(SceneError, match="unknown material"):
        load_scene(mesh, CUBE_MAP.replace("back: glass", "back: unobtainium"))
    with pytest.raises(SceneError, match="no entry"):
        load_scene(mesh.replace("g shell", "g other"), CUBE_MAP)


def test_degenerate_triangle_reports_its_index():
    mesh = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\ng s\nf 1 2 3\nf 1 2 4\n"
    mats = "ambient: air\nmaterials: {air: {}, metal: {pec: true}}\ngroups: {s: {pec_sheet: true}}\n"
    with pytest.raises(SceneError, match="triangle 1"):
        load_scene(mesh, mats)


def test_hit_sides_flip_between_entry_and_exit(glass_cube):
    o = np.array([[0.2, 0.1, 10.0]])
    d = np.array([[0.0, 0.0, -1.0]])
    mask, hit = intersect(glass_cube, o, d)
    assert mask[0] and hit.near_ambient[0] and not hit.far_ambient[0]
    assert abs(hit.t[0] - 8.5) < 1e-12
    assert np.dot(hit.normal[0], d[0]) < 0
    mask, hit2 = intersect(glass_cube, hit.point, d, t_min=glass_cube.eps)
    assert mask[0] and hit2.far_ambient[0] and abs(hit2.point[0, 2] + 1.5) < 1e-12


def test_occlusion_query(glass_cube):
    pts = np.array([[0.0, 0.0, 1.5], [0.0, 0.0, -1.5]])
    up = np.array([[0.0, 0.0, 1.0]] * 2)
    assert occluded(glass_cube, pts, up).tolist() == [False, True]


@given(st.floats(0, 180), st.floats(0, 360))
@settings(max_examples=30, deadline=None)
def test_launch_rect_covers_silhouette(theta, phi):
    scene = scenes.builtin_scene("pec_cube")
    th, ph = np.radians(theta), np.radians(phi)
    k = -np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    rect = launch_rect(scene, k)
    rel = scene.vertices - rect.center
    assert np.all(rel @ k > 0)  # launch plane is upstream of the scene
    assert np.all(np.abs(rel @ rect.u_axis) <= rect.half_extents[0] + 1e-9)
    assert np.all(np.abs(rel @ rect.v_axis) <= rect.half_extents[1] + 1e-9)
