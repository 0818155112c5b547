"""Per-frame rendering: color, metric depth, instance ids and forward flow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import geometry as geo
from ..scene import PROP_ID_BASE, SceneDescription
from .camera import Z_FAR, Z_NEAR, view_matrix
from .effects import apply_fog, apply_rain
from .raster import rasterize

GROUND_EXTENT = 2000.0


@dataclass
class FrameBuffers:
    color: np.ndarray  # (H, W, 3) float in [0, 1]
    depth: np.ndarray  # (H, W) camera z in meters, inf for sky
    instance: np.ndarray  # (H, W) int32, 0 background, track_id, or prop band
    flow: np.ndarray  # (H, W, 2) forward (du, dv) in pixels
    flow_valid: np.ndarray  # (H, W) bool


@dataclass
class _Geometry:
    quads: np.ndarray  # (Q, 4, 3) world space
    normals: np.ndarray  # (Q, 3) world space
    albedo: np.ndarray  # (Q, 3)
    instance: np.ndarray  # (Q,)
    owner: np.ndarray  # (Q,) index into the owners list; -1 for static geometry
    owners: list  # track ids of moving objects


def _object_quads(model: np.ndarray, shape: str, extents):
    qs, ns = [], []
    for center, half in geo.shape_parts(shape, extents):
        q, n = geo.box_quads(center, half)
        qs.append(q)
        ns.append(n)
    q = np.concatenate(qs)
    n = np.concatenate(ns)
    return geo.transform_points(model, q.reshape(-1, 3)).reshape(q.shape), n @ model[:3, :3].T


def scene_geometry(scene: SceneDescription, t: int) -> _Geometry:
    quads, normals, albedo, inst, owner = [], [], [], [], []
    owners = []
    for obj in scene.objects:
        pose = obj.poses.get(t)
        if pose is None:
            continue
        q, n = _object_quads(pose.matrix(), obj.shape, obj.extents)
        quads.append(q)
        normals.append(n)
        albedo.append(np.tile(obj.albedo, (len(q), 1)))
        inst.append(np.full(len(q), obj.track_id))
        owner.append(np.full(len(q), len(owners)))
        owners.append(obj.track_id)
    for i, prop in enumerate(scene.static_props):
        q, n = _object_quads(prop.pose.matrix(), "cuboid", prop.extents)
        quads.append(q)
        normals.append(n)
        albedo.append(np.tile(prop.albedo, (len(q), 1)))
        inst.append(np.full(len(q), PROP_ID_BASE + i))
        owner.append(np.full(len(q), -1))
    # ground: one large square under the camera, facing up (-y)
    cam = scene.camera_poses[t].position
    g = scene.ground_plane.height
    e = GROUND_EXTENT
    quads.append(np.array([[
        [cam[0] - e, g, cam[2] - e], [cam[0] + e, g, cam[2] - e],
        [cam[0] + e, g, cam[2] + e], [cam[0] - e, g, cam[2] + e],
    ]]))
    normals.append(np.array([[0.0, -1.0, 0.0]]))
    albedo.append(np.array([scene.ground_plane.albedo]))
    inst.append(np.array([0]))
    owner.append(np.array([-1]))
    return _Geometry(
        np.concatenate(quads), np.concatenate(normals), np.concatenate(albedo),
        np.concatenate(inst).astype(np.int32), np.concatenate(owner), owners,
    )


def _clip_near_far(poly: np.ndarray) -> np.ndarray:
    poly = geo.clip_polygon(poly, np.array([0.0, 0.0, 1.0, -Z_NEAR]))
    if len(poly):
        poly = geo.clip_polygon(poly, np.array([0.0, 0.0, -1.0, Z_FAR]))
    return poly


def _triangles(quads_cam: np.ndarray, keep: np.ndarray, intr):
    """Near/far clip camera-space quads and fan them into screen triangles."""
    z = quads_cam[..., 2]
    inside = np.all((z >= Z_NEAR) & (z <= Z_FAR), axis=1) & keep
    straddle = keep & ~inside & np.any(z >= Z_NEAR, axis=1) & np.any(z <= Z_FAR, axis=1)
    tris = [quads_cam[inside][:, [0, 1, 2]], quads_cam[inside][:, [0, 2, 3]]]
    faces = [np.flatnonzero(inside)] * 2
    extra, extra_f = [], []
    for qi in np.flatnonzero(straddle):
        poly = _clip_near_far(quads_cam[qi])
        for k in range(1, len(poly) - 1):
            extra.append(np.stack([poly[0], poly[k], poly[k + 1]]))
            extra_f.append(qi)
    if extra:
        tris.append(np.array(extra))
        faces.append(np.array(extra_f))
    tri = np.concatenate(tris)
    face = np.concatenate(faces)
    zt = tri[..., 2]
    xy = np.empty(tri.shape[:2] + (2,))
    xy[..., 0] = intr.fx * tri[..., 0] / zt + intr.cx
    xy[..., 1] = intr.fy * tri[..., 1] / zt + intr.cy
    return xy, 1.0 / zt, face


def _sky(scene: SceneDescription) -> np.ndarray:
    li = scene.lighting
    level = min(1.0, li.ambient_intensity + 0.6 * li.sun_intensity)
    blue = np.array([0.55, 0.7, 0.95])
    grey = np.array([0.8, 0.8, 0.82])
    mix = 1.0 if li.sun_intensity == 0 else 0.0
    return np.clip(((1 - mix) * blue + mix * grey) * level * np.array(li.sun_color) ** 0.3, 0, 1)


def _shade(geom: _Geometry, scene: SceneDescription) -> np.ndarray:
    li = scene.lighting
    ndotl = np.maximum(0.0, geom.normals @ np.array(li.sun_direction))
    light = li.ambient_intensity + li.sun_intensity * ndotl[:, None] * np.array(li.sun_color)
    return np.clip(geom.albedo * light, 0.0, 1.0)


def _pixel_rays(intr):
    u = np.arange(intr.width) + 0.5
    v = np.arange(intr.height) + 0.5
    return (u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy


def flow_pass(scene: SceneDescription, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Forward flow and its validity mask for frame ``t``."""
    buf = render_frame(scene, t)
    return buf.flow, buf.flow_valid


def _flow(scene: SceneDescription, t: int, depth: np.ndarray, face: np.ndarray, geom: _Geometry):
    """Forward flow t -> t+1 of every visible surface point.

    The camera-space surface point of each pixel is recovered exactly from the
    perspective-correct depth, carried back to its owner's local frame with
    the frame-t model-view, and forward with the frame-(t+1) model-view.
    """
    intr = scene.intrinsics
    H, W = depth.shape
    flow = np.zeros((H, W, 2))
    valid = np.zeros((H, W), dtype=bool)
    if t + 1 >= scene.frame_count:
        return flow, valid
    view_t = view_matrix(scene.camera_poses[t])
    view_n = view_matrix(scene.camera_poses[t + 1])
    cam_motion = view_n @ geo.invert_rigid(view_t)
    # one camera(t) -> camera(t+1) transform per owner; last slot = static world
    transforms = np.empty((len(geom.owners) + 1, 4, 4))
    present = np.ones(len(geom.owners) + 1, dtype=bool)
    for k, tid in enumerate(geom.owners):
        obj = scene.object(tid)
        nxt = obj.poses.get(t + 1)
        if nxt is None:
            present[k] = False
            transforms[k] = np.eye(4)
            continue
        m_t = obj.poses[t].matrix()
        transforms[k] = view_n @ nxt.matrix() @ geo.invert_rigid(m_t) @ geo.invert_rigid(view_t)
    transforms[-1] = cam_motion

    drawn = face >= 0
    owner = np.where(drawn, geom.owner[np.where(drawn, face, 0)], -1)
    slot = np.where(owner >= 0, owner, len(geom.owners))
    rx, ry = _pixel_rays(intr)
    jj, ii = np.nonzero(drawn)
    z = depth[jj, ii]
    p = np.stack([rx[ii] * z, ry[jj] * z, z], axis=1)
    slots = slot[jj, ii]
    q = np.empty_like(p)
    for k in np.unique(slots):
        sel = slots == k
        T = transforms[k]
        q[sel] = p[sel] @ T[:3, :3].T + T[:3, 3]
    ok = present[slots] & (q[:, 2] > Z_NEAR)
    with np.errstate(divide="ignore", invalid="ignore"):
        u1 = intr.fx * q[:, 0] / q[:, 2] + intr.cx
        v1 = intr.fy * q[:, 1] / q[:, 2] + intr.cy
    du = np.where(ok, u1 - (ii + 0.5), 0.0)
    dv = np.where(ok, v1 - (jj + 0.5), 0.0)
    flow[jj, ii, 0] = du
    flow[jj, ii, 1] = dv
    valid[jj, ii] = ok
    return flow, valid


def _visible_surfaces(scene: SceneDescription, t: int):
    """Z-buffer pass: (geometry, depth, face index, instance) of frame ``t``."""
    if not 0 <= t < scene.frame_count:
        raise IndexError(f"frame {t} outside [0, {scene.frame_count})")
    intr = scene.intrinsics
    geom = scene_geometry(scene, t)
    view = view_matrix(scene.camera_poses[t])
    q_cam = geo.transform_points(view, geom.quads.reshape(-1, 3)).reshape(geom.quads.shape)
    n_cam = geom.normals @ view[:3, :3].T
    # back faces: normal pointing away from the camera at the origin
    front = np.einsum("qj,qj->q", n_cam, q_cam[:, 0]) < 0
    xy, invz, tri_face = _triangles(q_cam, front, intr)
    invz_buf, face = rasterize(xy, invz, tri_face, intr.width, intr.height)
    drawn = face >= 0
    with np.errstate(divide="ignore"):
        depth = np.where(drawn, 1.0 / np.where(drawn, invz_buf, 1.0), np.inf)
    instance = np.where(drawn, geom.instance[np.where(drawn, face, 0)], 0).astype(np.int32)
    return geom, depth, face, instance


def render_instance(scene: SceneDescription, t: int) -> np.ndarray:
    """Instance pass alone; identical to ``render_frame(scene, t).instance``."""
    return _visible_surfaces(scene, t)[3]


def render_frame(scene: SceneDescription, t: int) -> FrameBuffers:
    """Render the four ground-truth passes of frame ``t``."""
    geom, depth, face, instance = _visible_surfaces(scene, t)
    drawn = face >= 0
    safe = np.where(drawn, face, 0)
    color = np.where(drawn[..., None], _shade(geom, scene)[safe], _sky(scene))
    if scene.weather.fog_beta > 0:
        color = apply_fog(color, depth, scene.weather)
    if scene.weather.rain_intensity > 0:
        color = apply_rain(color, scene.weather.rain_intensity, (scene.seed, t))
    flow, valid = _flow(scene, t, depth, face, geom)
    return FrameBuffers(color, depth, instance, flow, valid)
