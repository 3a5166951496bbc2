"""Bounding volume hierarchy over triangles and the ray-casting kernels.

The tree is built once in numpy (median splits along the widest centroid axis)
and flattened into arrays that the numba kernels walk with a fixed-size
explicit stack. Intersection is Moller-Trumbore with a small inclusive
barycentric tolerance so rays through shared edges never slip through a
crack; ties at equal ``t`` resolve to the smallest triangle id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

LEAF_SIZE = 4
BARY_EPS = 1e-10
_STACK = 64


@dataclass
class BVH:
    lo: np.ndarray        # (M, 3) node box minimum
    hi: np.ndarray        # (M, 3) node box maximum
    left: np.ndarray      # (M,) child index, -1 for leaves
    right: np.ndarray
    start: np.ndarray     # (M,) first entry in ``order`` for leaves
    count: np.ndarray
    order: np.ndarray     # triangle ids in leaf order

    @property
    def n_nodes(self) -> int:
        return len(self.left)


def build_bvh(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> BVH:
    tri_lo = np.minimum(np.minimum(v0, v1), v2)
    tri_hi = np.maximum(np.maximum(v0, v1), v2)
    cent = (v0 + v1 + v2) / 3.0
    n = len(v0)

    lo, hi, left, right, start, count = [], [], [], [], [], []
    order = np.arange(n, dtype=np.int64)

    def new_node():
        for lst in (lo, hi):
            lst.append(None)
        for lst in (left, right, start, count):
            lst.append(-1)
        return len(left) - 1

    # (node, begin, end) over ``order``; iterative to avoid recursion limits
    root = new_node()
    todo = [(root, 0, n)]
    while todo:
        node, b, e = todo.pop()
        ids = order[b:e]
        lo[node] = tri_lo[ids].min(axis=0)
        hi[node] = tri_hi[ids].max(axis=0)
        if e - b <= LEAF_SIZE:
            start[node], count[node] = b, e - b
            continue
        c = cent[ids]
        extent = c.max(axis=0) - c.min(axis=0)
        axis = int(np.argmax(extent))
        if extent[axis] <= 0.0:
            start[node], count[node] = b, e - b
            continue
        # stable sort keeps the build deterministic for equal centroids
        ids_sorted = ids[np.argsort(c[:, axis], kind="stable")]
        order[b:e] = ids_sorted
        mid = b + (e - b) // 2
        lch, rch = new_node(), new_node()
        left[node], right[node] = lch, rch
        todo.append((rch, mid, e))
        todo.append((lch, b, mid))

    return BVH(
        lo=np.array(lo, dtype=np.float64),
        hi=np.array(hi, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        start=np.array(start, dtype=np.int64),
        count=np.array(count, dtype=np.int64),
        order=order,
    )


@numba.njit(cache=True, nogil=True)
def _tri_hit(o0, o1, o2, d0, d1, d2, v0, e1, e2, tri):
    p0 = d1 * e2[tri, 2] - d2 * e2[tri, 1]
    p1 = d2 * e2[tri, 0] - d0 * e2[tri, 2]
    p2 = d0 * e2[tri, 1] - d1 * e2[tri, 0]
    det = e1[tri, 0] * p0 + e1[tri, 1] * p1 + e1[tri, 2] * p2
    if det == 0.0:
        return np.inf
    inv = 1.0 / det
    s0 = o0 - v0[tri, 0]
    s1 = o1 - v0[tri, 1]
    s2 = o2 - v0[tri, 2]
    u = (s0 * p0 + s1 * p1 + s2 * p2) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return np.inf
    q0 = s1 * e1[tri, 2] - s2 * e1[tri, 1]
    q1 = s2 * e1[tri, 0] - s0 * e1[tri, 2]
    q2 = s0 * e1[tri, 1] - s1 * e1[tri, 0]
    v = (d0 * q0 + d1 * q1 + d2 * q2) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return np.inf
    return (e2[tri, 0] * q0 + e2[tri, 1] * q1 + e2[tri, 2] * q2) * inv


@numba.njit(cache=True, nogil=True)
def _box_entry(o0, o1, o2, i0, i1, i2, lo, hi, node, t_max):
    tx0 = (lo[node, 0] - o0) * i0
    tx1 = (hi[node, 0] - o0) * i0
    tmin = min(tx0, tx1)
    tmax = max(tx0, tx1)
    ty0 = (lo[node, 1] - o1) * i1
    ty1 = (hi[node, 1] - o1) * i1
    tmin = max(tmin, min(ty0, ty1))
    tmax = min(tmax, max(ty0, ty1))
    tz0 = (lo[node, 2] - o2) * i2
    tz1 = (hi[node, 2] - o2) * i2
    tmin = max(tmin, min(tz0, tz1))
    tmax = min(tmax, max(tz0, tz1))
    # NaN from 0*inf (origin on a slab plane) must not reject the box
    if tmax != tmax or tmin != tmin:
        return -np.inf
    if tmax < 0.0 or tmin > tmax * (1.0 + 1e-12) + 1e-12 or tmin > t_max:
        return np.inf
    return tmin


@numba.njit(cache=True, nogil=True)
def _cast(origins, dirs, t_min, any_hit, v0, e1, e2, lo, hi, left, right, start, count, order, out_t, out_tri, r_begin, r_end):
    stack = np.empty(_STACK, dtype=np.int64)
    for r in range(r_begin, r_end):
        o0, o1, o2 = origins[r, 0], origins[r, 1], origins[r, 2]
        d0, d1, d2 = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        i0 = 1.0 / d0 if d0 != 0.0 else np.inf
        i1 = 1.0 / d1 if d1 != 0.0 else np.inf
        i2 = 1.0 / d2 if d2 != 0.0 else np.inf
        tmin_r = t_min[r]
        best_t = np.inf
        best_tri = -1
        sp = 0
        stack[sp] = 0
        sp += 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            if _box_entry(o0, o1, o2, i0, i1, i2, lo, hi, node, best_t) == np.inf:
                continue
            if left[node] < 0:
                for k in range(start[node], start[node] + count[node]):
                    tri = order[k]
                    t = _tri_hit(o0, o1, o2, d0, d1, d2, v0, e1, e2, tri)
                    if t > tmin_r and (t < best_t or (t == best_t and tri < best_tri)):
                        best_t = t
                        best_tri = tri
                if any_hit and best_tri >= 0:
                    break
            else:
                stack[sp] = left[node]
                stack[sp + 1] = right[node]
                sp += 2
        out_t[r] = best_t
        out_tri[r] = best_tri


@numba.njit(cache=True, nogil=True)
def _brute(origins, dirs, t_min, v0, e1, e2, out_t, out_tri):
    n_tri = v0.shape[0]
    for r in range(origins.shape[0]):
        best_t = np.inf
        best_tri = -1
        for tri in range(n_tri):
            t = _tri_hit(origins[r, 0], origins[r, 1], origins[r, 2], dirs[r, 0], dirs[r, 1], dirs[r, 2], v0, e1, e2, tri)
            if t > t_min[r] and t < best_t:
                best_t = t
                best_tri = tri
        out_t[r] = best_t
        out_tri[r] = best_tri


def cast_rays(bvh: BVH, v0, e1, e2, origins, dirs, t_min, any_hit=False):
    """Nearest hit (``t``, triangle id) per ray; misses get ``(inf, -1)``."""
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    n = len(origins)
    t_min = np.ascontiguousarray(np.broadcast_to(np.asarray(t_min, dtype=np.float64), (n,)))
    out_t = np.empty(n, dtype=np.float64)
    out_tri = np.empty(n, dtype=np.int64)
    if n:
        _cast(origins, dirs, t_min, any_hit, v0, e1, e2, bvh.lo, bvh.hi, bvh.left, bvh.right,
              bvh.start, bvh.count, bvh.order, out_t, out_tri, 0, n)
    return out_t, out_tri


def cast_rays_brute(v0, e1, e2, origins, dirs, t_min):
    """All-triangle reference for :func:`cast_rays` (test oracle)."""
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    n = len(origins)
    t_min = np.ascontiguousarray(np.broadcast_to(np.asarray(t_min, dtype=np.float64), (n,)))
    out_t = np.empty(n, dtype=np.float64)
    out_tri = np.empty(n, dtype=np.int64)
    _brute(origins, dirs, t_min, v0, e1, e2, out_t, out_tri)
    return out_t, out_tri
