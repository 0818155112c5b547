"""2D tracking ground truth derived from scene geometry and rendered buffers."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import geometry as geo
from .render.camera import Z_NEAR, frustum_planes, view_matrix
from .render.effects import fog_transmittance
from .scene import CameraIntrinsics, ObjectTrack, Pose, SceneDescription, Weather


@dataclass(frozen=True)
class EvalFilter:
    min_height_px: float = 25.0
    max_truncation: float = 0.5
    min_occupancy: float = 0.25
    min_visibility: float = 0.25

    def __post_init__(self):
        if self.min_height_px < 0:
            raise ValueError("min_height_px must be >= 0")
        for name in ("max_truncation", "min_occupancy", "min_visibility"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    def ignores(self, height: float, truncation: float, occupancy: float, visibility: float) -> bool:
        return (
            height < self.min_height_px
            or truncation > self.max_truncation
            or occupancy < self.min_occupancy
            or visibility < self.min_visibility
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d) -> "EvalFilter":
        return cls(**(d or {}))


def effective_filter(scene: SceneDescription, base: EvalFilter | None = None) -> EvalFilter:
    """``base`` with any thresholds the scene file sets on its own."""
    base = base or EvalFilter()
    if not scene.eval_filter:
        return base
    return EvalFilter.from_dict({**base.to_dict(), **scene.eval_filter})


@dataclass(frozen=True)
class GtBox2D:
    frame: int
    track_id: int
    left: float
    top: float
    right: float
    bottom: float
    truncation: float
    occupancy: float
    visibility: float
    ignore: bool
    # 3D context for the KITTI-layout export (camera frame, KITTI conventions)
    dims_hwl: tuple[float, float, float] = (0.0, 0.0, 0.0)
    location: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation_y: float = 0.0
    alpha: float = 0.0

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.right, self.bottom)

    @property
    def height(self) -> float:
        return self.bottom - self.top

    @property
    def occlusion_code(self) -> int:
        """0 fully visible, 1 partly occluded, 2 largely occluded."""
        if self.occupancy > 0.75:
            return 0
        if self.occupancy >= 0.25:
            return 1
        return 2


def _object_to_camera(pose: Pose, camera_pose: Pose) -> np.ndarray:
    return view_matrix(camera_pose) @ pose.matrix()


def project_box(
    pose: Pose, extents, camera_pose: Pose, intr: CameraIntrinsics
) -> tuple[float, float, float, float] | None:
    """Image-clipped 2D hull of the projected 3D bounding cuboid.

    Cuboid edges crossing the near plane are cut there first, so boxes of
    objects partly behind the camera stay finite.
    """
    corners = geo.transform_points(
        _object_to_camera(pose, camera_pose), geo.box_corners(geo.cuboid_half_sizes(extents))
    )
    z = corners[:, 2]
    front = z > Z_NEAR
    if not front.any():
        return None
    pts = [corners[front]]
    for a, b in geo.BOX_EDGES:
        if front[a] != front[b]:
            t = (Z_NEAR - z[a]) / (z[b] - z[a])
            pts.append((corners[a] + t * (corners[b] - corners[a]))[None])
    p = np.concatenate(pts)
    u = intr.fx * p[:, 0] / p[:, 2] + intr.cx
    v = intr.fy * p[:, 1] / p[:, 2] + intr.cy
    left, right = max(u.min(), 0.0), min(u.max(), float(intr.width))
    top, bottom = max(v.min(), 0.0), min(v.max(), float(intr.height))
    if right <= left or bottom <= top:
        return None
    return (float(left), float(top), float(right), float(bottom))


def truncation_rate(pose: Pose, extents, camera_pose: Pose, intr: CameraIntrinsics) -> float:
    """1 - volume of the local bounding box of the in-frustum part / full volume."""
    half = geo.cuboid_half_sizes(extents)
    to_cam = _object_to_camera(pose, camera_pose)
    faces = [geo.transform_points(to_cam, f) for f in geo.cuboid_faces(half)]
    planes = frustum_planes(intr)
    corners = geo.transform_points(to_cam, geo.box_corners(half))
    if (corners @ planes[:, :3].T + planes[:, 3] >= 0).all():
        return 0.0
    for plane in planes:
        faces = geo.clip_polyhedron(faces, plane)
        if not faces:
            return 1.0
    verts = geo.transform_points(geo.invert_rigid(to_cam), geo.polyhedron_vertices(faces))
    if len(verts) < 4:
        return 1.0
    size = verts.max(axis=0) - verts.min(axis=0)
    ratio = float(np.prod(size) / np.prod(2.0 * half))
    return float(min(1.0, max(0.0, 1.0 - ratio)))


def box_pixel_window(box, width: int, height: int) -> tuple[int, int, int, int]:
    """Column/row ranges [i0, i1) x [j0, j1) of pixels whose centers lie in the box."""
    left, top, right, bottom = box
    i0 = max(int(math.ceil(left - 0.5)), 0)
    i1 = min(int(math.ceil(right - 0.5)), width)
    j0 = max(int(math.ceil(top - 0.5)), 0)
    j1 = min(int(math.ceil(bottom - 0.5)), height)
    return i0, i1, j0, j1


def occupancy_rate(instance: np.ndarray, track_id: int, box) -> float:
    """Share of the box's pixels showing the object itself (occluders count against it)."""
    h, w = instance.shape
    i0, i1, j0, j1 = box_pixel_window(box, w, h)
    area = max(i1 - i0, 0) * max(j1 - j0, 0)
    if area == 0:
        return 0.0
    own = np.count_nonzero(instance[j0:j1, i0:i1] == track_id)
    return own / area


def fog_visibility(center_depth: float, weather: Weather) -> float:
    if weather.fog_beta == 0:
        return 1.0
    return float(fog_transmittance(center_depth, weather.fog_beta))


def _kitti_3d(pose: Pose, extents, camera_pose: Pose):
    to_cam = _object_to_camera(pose, camera_pose)
    length, width, height = extents
    # KITTI locates the bottom face center; y points down
    bottom = geo.transform_points(to_cam, np.array([[0.0, height / 2, 0.0]]))[0]
    fwd = to_cam[:3, :3] @ np.array([0.0, 0.0, 1.0])
    yaw_cam = math.atan2(fwd[0], fwd[2])
    ry = _wrap(yaw_cam - math.pi / 2)
    alpha = _wrap(ry - math.atan2(bottom[0], bottom[2]))
    return (height, width, length), tuple(float(c) for c in bottom), ry, alpha


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def annotate_frame(
    scene: SceneDescription, t: int, instance: np.ndarray, eval_filter: EvalFilter
) -> list[GtBox2D]:
    intr = scene.intrinsics
    cam = scene.camera_poses[t]
    view = view_matrix(cam)
    rows = []
    for obj in sorted(scene.objects, key=lambda o: o.track_id):
        pose = obj.poses.get(t)
        if pose is None:
            continue
        box = project_box(pose, obj.extents, cam, intr)
        if box is None:
            continue
        trunc = truncation_rate(pose, obj.extents, cam, intr)
        occ = occupancy_rate(instance, obj.track_id, box)
        center_depth = float(geo.transform_points(view, np.array([pose.position]))[0, 2])
        vis = fog_visibility(max(center_depth, Z_NEAR), scene.weather)
        dims, loc, ry, alpha = _kitti_3d(pose, obj.extents, cam)
        rows.append(
            GtBox2D(
                t, obj.track_id, *box, trunc, occ, vis,
                eval_filter.ignores(box[3] - box[1], trunc, occ, vis),
                dims, loc, ry, alpha,
            )
        )
    return rows


def annotate_sequence(
    scene: SceneDescription, buffers: Sequence, eval_filter: EvalFilter | None = None
) -> list[GtBox2D]:
    """Ground-truth rows for all frames, sorted by (frame, track_id).

    ``buffers`` holds one entry per frame: a ``FrameBuffers`` or an instance map.
    """
    eval_filter = effective_filter(scene, eval_filter)
    if len(buffers) != scene.frame_count:
        raise ValueError(f"got buffers for {len(buffers)} frames, scene has {scene.frame_count}")
    rows = []
    for t, b in enumerate(buffers):
        inst = getattr(b, "instance", b)
        if inst.shape != (scene.intrinsics.height, scene.intrinsics.width):
            raise ValueError(f"frame {t}: buffer size does not match the scene intrinsics")
        rows.extend(annotate_frame(scene, t, inst, eval_filter))
    return sorted(rows, key=lambda r: (r.frame, r.track_id))


def refilter(rows: Iterable[GtBox2D], eval_filter: EvalFilter) -> list[GtBox2D]:
    return [
        dataclasses.replace(
            r, ignore=eval_filter.ignores(r.height, r.truncation, r.occupancy, r.visibility)
        )
        for r in rows
    ]


# ---------------------------------------------------------------------------
# Files


def _f(x: float) -> str:
    return f"{x:.6f}"


def write_gt(rows: Sequence[GtBox2D], path) -> None:
    """KITTI tracking layout plus a ``.meta`` sidecar with the continuous rates."""
    path = Path(path)
    lines, meta = [], []
    for r in rows:
        h, w, l = r.dims_hwl
        x, y, z = r.location
        lines.append(
            " ".join(
                [str(r.frame), str(r.track_id), "Car", _f(r.truncation), str(r.occlusion_code),
                 _f(r.alpha), _f(r.left), _f(r.top), _f(r.right), _f(r.bottom),
                 _f(h), _f(w), _f(l), _f(x), _f(y), _f(z), _f(r.rotation_y), _f(-1.0)]
            )
        )
        meta.append(f"{r.frame} {r.track_id} {_f(r.occupancy)} {_f(r.visibility)} {int(r.ignore)}")
    path.write_text("".join(s + "\n" for s in lines))
    path.with_suffix(".meta").write_text("".join(s + "\n" for s in meta))


def read_gt(path) -> list[GtBox2D]:
    path = Path(path)
    meta = {}
    meta_path = path.with_suffix(".meta")
    if meta_path.exists():
        for line in meta_path.read_text().splitlines():
            if line.strip():
                f, tid, occ, vis, ign = line.split()
                meta[(int(f), int(tid))] = (float(occ), float(vis), bool(int(ign)))
    rows = []
    for line in path.read_text().splitlines():
        p = line.split()
        if not p:
            continue
        if p[2] != "Car":
            continue
        frame, tid = int(p[0]), int(p[1])
        left, top, right, bottom = (float(v) for v in p[6:10])
        occ, vis, ign = meta.get((frame, tid), ((1.0, 0.5, 0.25)[int(p[4])], 1.0, False))
        rows.append(
            GtBox2D(
                frame, tid, left, top, right, bottom, float(p[3]), occ, vis, ign,
                (float(p[10]), float(p[11]), float(p[12])),
                (float(p[13]), float(p[14]), float(p[15])),
                float(p[16]), float(p[5]),
            )
        )
    return rows
