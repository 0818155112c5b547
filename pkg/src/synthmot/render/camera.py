"""Model / view / projection matrices for the pinhole camera."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import geometry as geo
from ..scene import CameraIntrinsics, Pose

Z_NEAR = 0.1
Z_FAR = 1000.0


@dataclass(frozen=True)
class CameraMatrices:
    view: np.ndarray  # world -> camera
    projection: np.ndarray  # camera -> clip; pixel = clip[:2] / clip[3]
    model: dict | None = None  # track_id -> object -> world

    def mvp(self, model: np.ndarray) -> np.ndarray:
        return self.projection @ self.view @ model


def projection_matrix(intr: CameraIntrinsics, near: float = Z_NEAR, far: float = Z_FAR) -> np.ndarray:
    a = far / (far - near)
    return np.array(
        [
            [intr.fx, 0.0, intr.cx, 0.0],
            [0.0, intr.fy, intr.cy, 0.0],
            [0.0, 0.0, a, -a * near],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )


def view_matrix(camera_pose: Pose) -> np.ndarray:
    return geo.invert_rigid(camera_pose.matrix())


def compute_camera_matrices(camera_pose: Pose, intrinsics: CameraIntrinsics) -> CameraMatrices:
    return CameraMatrices(view_matrix(camera_pose), projection_matrix(intrinsics))


def project(points_cam: np.ndarray, intr: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates (N, 2) and depths (N,) of camera-space points."""
    p = np.atleast_2d(points_cam)
    z = p[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intr.fx * p[:, 0] / z + intr.cx
        v = intr.fy * p[:, 1] / z + intr.cy
    return np.stack([u, v], axis=1), z


def project_world(points: np.ndarray, camera_pose: Pose, intr: CameraIntrinsics):
    return project(geo.transform_points(view_matrix(camera_pose), points), intr)


def frustum_planes(intr: CameraIntrinsics, near: float = Z_NEAR, far: float = Z_FAR) -> np.ndarray:
    """(6, 4) camera-space half spaces ``n.x + d >= 0`` bounding the image."""
    return np.array(
        [
            [0.0, 0.0, 1.0, -near],
            [0.0, 0.0, -1.0, far],
            [intr.fx, 0.0, intr.cx, 0.0],  # u >= 0
            [-intr.fx, 0.0, intr.width - intr.cx, 0.0],  # u <= width
            [0.0, intr.fy, intr.cy, 0.0],  # v >= 0
            [0.0, -intr.fy, intr.height - intr.cy, 0.0],  # v <= height
        ]
    )
