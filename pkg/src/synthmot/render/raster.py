"""Z-buffered triangle rasterization.

Pixel (i, j) covers ``[i, i+1) x [j, j+1)`` and is sampled at its center
``(i + 0.5, j + 0.5)``. Pixels whose center falls exactly on an edge follow
the top-left fill convention, so abutting triangles never both claim one.
Depth is resolved on interpolated inverse depth, which is exact for planar
triangles under perspective projection.
"""

from __future__ import annotations

import numpy as np


def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def _owns_ties(ax, ay, bx, by) -> bool:
    # inward normal of edge a->b for a positively oriented triangle
    nx, ny = -(by - ay), bx - ax
    return nx > 0 or (nx == 0 and ny > 0)


def rasterize(
    tri_xy: np.ndarray,
    tri_invz: np.ndarray,
    tri_face: np.ndarray,
    width: int,
    height: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Rasterize triangles into an inverse-depth buffer and a face-index buffer.

    ``tri_xy`` is (T, 3, 2) in pixels, ``tri_invz`` (T, 3) the inverse camera
    depth of each vertex, ``tri_face`` (T,) an integer payload. Returns
    ``(invz, face)`` with ``face == -1`` where nothing was drawn. Triangles are
    processed in order; an equal-depth later triangle does not overwrite.
    """
    invz_buf = np.zeros((height, width))
    face_buf = np.full((height, width), -1, dtype=np.int64)
    xs_all = np.arange(width) + 0.5
    ys_all = np.arange(height) + 0.5
    for k in range(len(tri_xy)):
        (x0, y0), (x1, y1), (x2, y2) = tri_xy[k]
        w0, w1, w2 = tri_invz[k]
        area = _edge(x0, y0, x1, y1, x2, y2)
        if area == 0 or not np.isfinite(area):
            continue
        if area < 0:
            x1, y1, x2, y2 = x2, y2, x1, y1
            w1, w2 = w2, w1
            area = -area
        i0 = max(int(np.floor(min(x0, x1, x2) - 0.5)), 0)
        i1 = min(int(np.ceil(max(x0, x1, x2) - 0.5)), width - 1)
        j0 = max(int(np.floor(min(y0, y1, y2) - 0.5)), 0)
        j1 = min(int(np.ceil(max(y0, y1, y2) - 0.5)), height - 1)
        if i0 > i1 or j0 > j1:
            continue
        px = xs_all[i0 : i1 + 1][None, :]
        py = ys_all[j0 : j1 + 1][:, None]
        e0 = _edge(x1, y1, x2, y2, px, py)
        e1 = _edge(x2, y2, x0, y0, px, py)
        e2 = _edge(x0, y0, x1, y1, px, py)
        inside = (
            ((e0 > 0) | ((e0 == 0) & _owns_ties(x1, y1, x2, y2)))
            & ((e1 > 0) | ((e1 == 0) & _owns_ties(x2, y2, x0, y0)))
            & ((e2 > 0) | ((e2 == 0) & _owns_ties(x0, y0, x1, y1)))
        )
        if not inside.any():
            continue
        iz = (e0 * w0 + e1 * w1 + e2 * w2) / area
        sub_z = invz_buf[j0 : j1 + 1, i0 : i1 + 1]
        win = inside & (iz > sub_z)
        sub_z[win] = iz[win]
        face_buf[j0 : j1 + 1, i0 : i1 + 1][win] = tri_face[k]
    return invz_buf, face_buf
