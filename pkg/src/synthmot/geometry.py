"""Rigid transforms, cuboid meshes and convex clipping.

World frame: x right, y down, z forward (right handed, the KITTI camera
convention). "Up" is therefore -y and the ground plane is ``y = height``.
"""

from __future__ import annotations

import numpy as np

# Fraction of the bounding extents used by the two car parts, as
# (center offset x, y, z, half size x, y, z), all relative to (w, h, l).
CAR_PARTS = (
    # body: full footprint, lower 60 % of the height
    (0.0, 0.2, 0.0, 0.5, 0.3, 0.5),
    # cabin: narrower and shorter, upper 40 %, shifted to the rear
    (0.0, -0.3, -0.1, 0.45, 0.2, 0.275),
)

# Quad faces of a box as corner indices in cyclic order, with outward
# normals. Corner index bits select +x, +y, +z.
_BOX_FACES = np.array(
    [
        [0, 2, 6, 4],  # -x
        [1, 5, 7, 3],  # +x
        [0, 4, 5, 1],  # -y
        [2, 3, 7, 6],  # +y
        [0, 1, 3, 2],  # -z
        [4, 6, 7, 5],  # +z
    ]
)
_BOX_NORMALS = np.array(
    [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]], dtype=float
)
_SIGNS = np.array([[(i >> 0) & 1, (i >> 1) & 1, (i >> 2) & 1] for i in range(8)]) * 2.0 - 1.0

# Cuboid edges as pairs of corner indices (corners differ in one bit).
BOX_EDGES = np.array([(i, i | b) for i in range(8) for b in (1, 2, 4) if not i & b])


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation(yaw: float, pitch: float = 0.0, roll: float = 0.0) -> np.ndarray:
    """Local-to-world rotation: yaw about up, then pitch about right, then roll.

    Positive yaw turns the forward axis (+z) towards +x, i.e. clockwise seen
    from above; positive pitch lifts the forward axis towards up (-y).
    """
    return rot_y(yaw) @ rot_x(pitch) @ rot_z(roll)


def rigid(R: np.ndarray, t) -> np.ndarray:
    M = np.eye(4)
    M[:3, :3] = R
    M[:3, 3] = t
    return M


def invert_rigid(M: np.ndarray) -> np.ndarray:
    R = M[:3, :3]
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ M[:3, 3]
    return out


def transform_points(M: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    return pts @ M[:3, :3].T + M[:3, 3]


def box_corners(half: np.ndarray, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """(8, 3) corners of an axis-aligned box; index bits select +x, +y, +z."""
    return np.asarray(center, dtype=float) + _SIGNS * np.asarray(half, dtype=float)


def cuboid_half_sizes(extents) -> np.ndarray:
    """Half sizes along local (x, y, z) from (length, width, height)."""
    length, width, height = extents
    return 0.5 * np.array([width, height, length], dtype=float)


def shape_parts(shape: str, extents) -> list[tuple[np.ndarray, np.ndarray]]:
    """Boxes (center, half sizes) in object-local coordinates composing a shape."""
    half = cuboid_half_sizes(extents)
    if shape == "cuboid":
        return [(np.zeros(3), half)]
    if shape == "car_lowpoly":
        size = 2.0 * half
        return [
            (np.array(p[:3]) * size, np.array(p[3:]) * size) for p in CAR_PARTS
        ]
    raise ValueError(f"unknown shape {shape!r}")


def box_quads(center: np.ndarray, half: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Quads (6, 4, 3) and outward normals (6, 3) of an axis-aligned box."""
    corners = box_corners(half, center)
    return corners[_BOX_FACES], _BOX_NORMALS.copy()


# ---------------------------------------------------------------------------
# Convex clipping


def clip_polygon(poly: np.ndarray, plane: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a planar polygon to ``n.x + d >= 0``."""
    n, d = plane[:3], plane[3]
    if len(poly) == 0:
        return poly
    dist = poly @ n + d
    if np.all(dist >= 0):
        return poly
    if np.all(dist < 0):
        return poly[:0]
    out = []
    k = len(poly)
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        da, db = dist[i], dist[(i + 1) % k]
        if da >= 0:
            out.append(a)
        if (da >= 0) != (db >= 0):
            t = da / (da - db)
            out.append(a + t * (b - a))
    return np.array(out) if out else poly[:0]


def _order_cap(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    pts = _unique_points(points)
    if len(pts) < 3:
        return pts
    c = pts.mean(axis=0)
    u = pts[0] - c
    if np.linalg.norm(u) < 1e-15:
        u = pts[1] - c
    u = u / np.linalg.norm(u)
    v = np.cross(normal, u)
    ang = np.arctan2((pts - c) @ v, (pts - c) @ u)
    return pts[np.argsort(ang)]


def _unique_points(points: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Drop near-duplicate points, keeping first occurrences in order."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        return np.zeros((0, 3))
    d = np.abs(points[:, None, :] - points[None, :, :]).max(axis=2)
    dup = np.triu(d <= tol, k=1).any(axis=0)
    return points[~dup]


def clip_polyhedron(faces: list[np.ndarray], plane: np.ndarray) -> list[np.ndarray]:
    """Clip a closed convex polyhedron (list of polygon faces) to a half space.

    The cut is closed with a cap face built from the new edge points, so the
    result can be fed into the next clip.
    """
    out = []
    cap = []
    n, d = plane[:3], plane[3]
    scale = max(np.linalg.norm(n), 1e-300)
    for f in faces:
        c = clip_polygon(f, plane)
        if len(c) >= 3:
            out.append(c)
            on = np.abs(c @ n + d) <= 1e-9 * scale * max(1.0, np.abs(c).max())
            cap.extend(c[on])
    if not out:
        return []
    if len(cap) >= 3:
        capf = _order_cap(np.array(cap), -n / scale)
        if len(capf) >= 3:
            out.append(capf)
    return out


def polyhedron_vertices(faces: list[np.ndarray]) -> np.ndarray:
    if not faces:
        return np.zeros((0, 3))
    return _unique_points(np.concatenate(faces), tol=1e-12)


def cuboid_faces(half: np.ndarray) -> list[np.ndarray]:
    quads, _ = box_quads(np.zeros(3), half)
    return [q.copy() for q in quads]


# ---------------------------------------------------------------------------
# Footprint overlap


def footprint(center_xz, yaw: float, length: float, width: float) -> np.ndarray:
    """(4, 2) ground-plane rectangle corners in (x, z) of a yawed object."""
    fwd = np.array([np.sin(yaw), np.cos(yaw)])
    right = np.array([np.cos(yaw), -np.sin(yaw)])
    c = np.asarray(center_xz, dtype=float)
    hl, hw = 0.5 * length, 0.5 * width
    return np.array(
        [c + hl * fwd + hw * right, c + hl * fwd - hw * right,
         c - hl * fwd - hw * right, c - hl * fwd + hw * right]
    )


def rectangles_overlap(a: np.ndarray, b: np.ndarray, margin: float = 0.0) -> bool:
    """Separating-axis test for two convex (4, 2) rectangles."""
    for poly in (a, b):
        for i in range(4):
            edge = poly[(i + 1) % 4] - poly[i]
            axis = np.array([-edge[1], edge[0]])
            axis /= np.linalg.norm(axis)
            pa, pb = a @ axis, b @ axis
            if pa.max() + margin <= pb.min() or pb.max() + margin <= pa.min():
                return False
    return True
