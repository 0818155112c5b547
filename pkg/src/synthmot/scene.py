"""Virtual-world description, procedural seed scenes and condition variations.

Angles are radians in memory and degrees on disk. Object poses place the
geometric center of the object's bounding cuboid; extents are
``(length, width, height)`` along local ``(z, x, y)``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import geometry as geo

SHAPES = ("cuboid", "car_lowpoly")
PRESETS = ("clone", "morning", "sunset", "overcast")
MOTION_STYLES = ("urban", "intersection", "highway", "static_camera")
VARIATION_KINDS = (
    "clone", "rotate_right_15", "rotate_left_15", "morning", "sunset",
    "overcast", "fog", "rain", "custom",
)
# the seven non-identity conditions, in table order
CANONICAL_VARIATIONS = (
    "rotate_right_15", "rotate_left_15", "morning", "sunset", "overcast", "fog", "rain",
)

PROP_ID_BASE = 60000
PROP_ID_MAX = 65000

FOG_BETA = 0.03
RAIN_INTENSITY = 0.7
ROTATION_DEG = 15.0
KITTI_HEIGHT = 1.65
_FILTER_KEYS = {"min_height_px", "max_truncation", "min_occupancy", "min_visibility"}


class SceneError(ValueError):
    """Invalid scene content or unreadable scene file."""


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def rotation(self) -> np.ndarray:
        return geo.rotation(self.yaw, self.pitch, self.roll)

    def matrix(self) -> np.ndarray:
        """Local-to-world 4x4 transform."""
        return geo.rigid(self.rotation(), self.position)

    def validate(self, where: str) -> None:
        vals = (*self.position, self.yaw, self.pitch, self.roll)
        if len(self.position) != 3 or not all(math.isfinite(v) for v in vals):
            raise SceneError(f"{where}: pose must be finite with a 3-vector position")


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float = 721.5377
    fy: float = 721.5377
    cx: float = 609.5593
    cy: float = 172.854
    width: int = 1242
    height: int = 375

    def validate(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise SceneError("intrinsics: fx, fy must be positive")
        if self.width < 16 or self.height < 16:
            raise SceneError("intrinsics: width and height must be at least 16")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise SceneError("intrinsics: principal point must lie inside the image")

    def scaled(self, factor: float) -> "CameraIntrinsics":
        w = int(round(self.width * factor))
        h = int(round(self.height * factor))
        sx, sy = w / self.width, h / self.height
        return CameraIntrinsics(self.fx * sx, self.fy * sy, self.cx * sx, self.cy * sy, w, h)

    def resized(self, width: int, height: int) -> "CameraIntrinsics":
        sx, sy = width / self.width, height / self.height
        return CameraIntrinsics(self.fx * sx, self.fy * sy, self.cx * sx, self.cy * sy, width, height)


@dataclass(frozen=True)
class ObjectTrack:
    track_id: int
    extents: tuple[float, float, float]
    shape: str = "car_lowpoly"
    albedo: tuple[float, float, float] = (0.6, 0.1, 0.1)
    poses: Mapping[int, Pose] = field(default_factory=dict)

    def validate(self, frame_count: int) -> None:
        where = f"objects[track_id={self.track_id}]"
        # instance value 0 marks background, so object ids start at 1
        if not isinstance(self.track_id, int) or self.track_id < 1:
            raise SceneError(f"{where}.track_id: must be a positive integer (0 is background)")
        if self.track_id >= PROP_ID_BASE:
            raise SceneError(f"{where}.track_id: ids >= {PROP_ID_BASE} are reserved for props")
        if len(self.extents) != 3 or not all(math.isfinite(e) and e > 0 for e in self.extents):
            raise SceneError(f"{where}.extents: must be three positive lengths")
        if self.shape not in SHAPES:
            raise SceneError(f"{where}.shape: unknown shape {self.shape!r}")
        _check_rgb(self.albedo, f"{where}.albedo")
        for k, p in self.poses.items():
            if not (isinstance(k, int) and 0 <= k < frame_count):
                raise SceneError(
                    f"{where}.poses: frame {k} outside [0, {frame_count}) for track_id {self.track_id}"
                )
            p.validate(f"{where}.poses[{k}]")


@dataclass(frozen=True)
class StaticProp:
    extents: tuple[float, float, float]
    pose: Pose
    albedo: tuple[float, float, float] = (0.5, 0.5, 0.5)


@dataclass(frozen=True)
class GroundPlane:
    height: float = 0.0  # world y of the ground (y points down)
    albedo: tuple[float, float, float] = (0.35, 0.35, 0.35)


@dataclass(frozen=True)
class Lighting:
    sun_direction: tuple[float, float, float] = (0.3535533905932738, -0.7071067811865476, 0.6123724356957945)
    sun_intensity: float = 0.8
    sun_color: tuple[float, float, float] = (1.0, 1.0, 1.0)
    ambient_intensity: float = 0.35
    preset: str = "clone"

    def validate(self) -> None:
        n = math.sqrt(sum(c * c for c in self.sun_direction))
        if abs(n - 1.0) > 1e-9:
            raise SceneError("lighting.sun_direction: must be a unit vector")
        if self.sun_intensity < 0 or self.ambient_intensity < 0:
            raise SceneError("lighting: intensities must be non-negative")
        if self.preset not in PRESETS:
            raise SceneError(f"lighting.preset: unknown preset {self.preset!r}")
        _check_rgb(self.sun_color, "lighting.sun_color")


@dataclass(frozen=True)
class Weather:
    fog_beta: float = 0.0
    fog_color: tuple[float, float, float] = (0.75, 0.75, 0.78)
    rain_intensity: float = 0.0

    def validate(self) -> None:
        if not (math.isfinite(self.fog_beta) and self.fog_beta >= 0):
            raise SceneError("weather.fog_beta: must be >= 0")
        if not 0.0 <= self.rain_intensity <= 1.0:
            raise SceneError("weather.rain_intensity: must lie in [0, 1]")
        _check_rgb(self.fog_color, "weather.fog_color")


@dataclass(frozen=True)
class SceneDescription:
    frame_count: int
    fps: float
    intrinsics: CameraIntrinsics
    camera_poses: tuple[Pose, ...]
    objects: tuple[ObjectTrack, ...] = ()
    static_props: tuple[StaticProp, ...] = ()
    ground_plane: GroundPlane = GroundPlane()
    lighting: Lighting = Lighting()
    weather: Weather = Weather()
    seed: int = 0
    eval_filter: Mapping[str, float] | None = None

    def validate(self) -> "SceneDescription":
        if not isinstance(self.frame_count, int) or self.frame_count < 1:
            raise SceneError("frame_count: must be a positive integer")
        if not self.fps > 0:
            raise SceneError("fps: must be positive")
        self.intrinsics.validate()
        if len(self.camera_poses) != self.frame_count:
            raise SceneError(
                f"camera_poses: expected {self.frame_count} poses, got {len(self.camera_poses)}"
            )
        for i, p in enumerate(self.camera_poses):
            p.validate(f"camera_poses[{i}]")
        seen = set()
        for obj in self.objects:
            obj.validate(self.frame_count)
            if obj.track_id in seen:
                raise SceneError(f"objects: duplicate track_id {obj.track_id}")
            seen.add(obj.track_id)
        if len(self.static_props) > PROP_ID_MAX - PROP_ID_BASE:
            raise SceneError("static_props: too many props for the reserved id band")
        for i, prop in enumerate(self.static_props):
            if len(prop.extents) != 3 or not all(e > 0 for e in prop.extents):
                raise SceneError(f"static_props[{i}].extents: must be three positive lengths")
            prop.pose.validate(f"static_props[{i}].pose")
            _check_rgb(prop.albedo, f"static_props[{i}].albedo")
        _check_rgb(self.ground_plane.albedo, "ground_plane.albedo")
        self.lighting.validate()
        self.weather.validate()
        if self.eval_filter is not None:
            unknown = set(self.eval_filter) - _FILTER_KEYS
            if unknown:
                raise SceneError(f"eval_filter: unknown field(s) {sorted(unknown)}")
            if not all(isinstance(v, (int, float)) for v in self.eval_filter.values()):
                raise SceneError("eval_filter: thresholds must be numbers")
        return self

    def object(self, track_id: int) -> ObjectTrack:
        for obj in self.objects:
            if obj.track_id == track_id:
                return obj
        raise KeyError(track_id)


def _check_rgb(rgb, where: str) -> None:
    if len(rgb) != 3 or not all(0.0 <= c <= 1.0 for c in rgb):
        raise SceneError(f"{where}: must be RGB in [0, 1]")


# ---------------------------------------------------------------------------
# Serialization


def _pose_to_json(p: Pose) -> dict:
    return {
        "position": [float(v) for v in p.position],
        "yaw": math.degrees(p.yaw),
        "pitch": math.degrees(p.pitch),
        "roll": math.degrees(p.roll),
    }


def _pose_from_json(d: Mapping, where: str) -> Pose:
    try:
        pos = tuple(float(v) for v in d["position"])
        return Pose(
            pos,
            math.radians(float(d.get("yaw", 0.0))),
            math.radians(float(d.get("pitch", 0.0))),
            math.radians(float(d.get("roll", 0.0))),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SceneError(f"{where}: bad pose ({e})") from None


def scene_to_dict(scene: SceneDescription) -> dict:
    d: dict[str, Any] = {
        "format": "synthmot-scene",
        "version": 1,
        "frame_count": scene.frame_count,
        "fps": scene.fps,
        "seed": scene.seed,
        "intrinsics": dataclasses.asdict(scene.intrinsics),
        "camera_poses": [_pose_to_json(p) for p in scene.camera_poses],
        "objects": [
            {
                "track_id": o.track_id,
                "extents": list(o.extents),
                "shape": o.shape,
                "albedo": list(o.albedo),
                "poses": {str(k): _pose_to_json(o.poses[k]) for k in sorted(o.poses)},
            }
            for o in scene.objects
        ],
        "static_props": [
            {"extents": list(p.extents), "pose": _pose_to_json(p.pose), "albedo": list(p.albedo)}
            for p in scene.static_props
        ],
        "ground_plane": {"height": scene.ground_plane.height, "albedo": list(scene.ground_plane.albedo)},
        "lighting": {
            "sun_direction": list(scene.lighting.sun_direction),
            "sun_intensity": scene.lighting.sun_intensity,
            "sun_color": list(scene.lighting.sun_color),
            "ambient_intensity": scene.lighting.ambient_intensity,
            "preset": scene.lighting.preset,
        },
        "weather": {
            "fog_beta": scene.weather.fog_beta,
            "fog_color": list(scene.weather.fog_color),
            "rain_intensity": scene.weather.rain_intensity,
        },
    }
    if scene.eval_filter is not None:
        d["eval_filter"] = dict(scene.eval_filter)
    return d


def _tuple3(v, where: str) -> tuple[float, float, float]:
    try:
        out = tuple(float(x) for x in v)
    except (TypeError, ValueError):
        raise SceneError(f"{where}: expected three numbers") from None
    if len(out) != 3:
        raise SceneError(f"{where}: expected three numbers")
    return out  # type: ignore[return-value]


def scene_from_dict(d: Mapping) -> SceneDescription:
    def req(m: Mapping, key: str, where: str):
        if key not in m:
            raise SceneError(f"{where}{key}: missing field")
        return m[key]

    try:
        fc = req(d, "frame_count", "")
        if not isinstance(fc, int):
            raise SceneError("frame_count: must be an integer")
        intr = req(d, "intrinsics", "")
        intrinsics = CameraIntrinsics(
            float(intr["fx"]), float(intr["fy"]), float(intr["cx"]), float(intr["cy"]),
            int(intr["width"]), int(intr["height"]),
        )
        cams = tuple(
            _pose_from_json(p, f"camera_poses[{i}]") for i, p in enumerate(req(d, "camera_poses", ""))
        )
        objects = []
        for i, o in enumerate(d.get("objects", [])):
            where = f"objects[{i}]"
            poses = {}
            for k, p in req(o, "poses", where + ".").items():
                try:
                    frame = int(k)
                except ValueError:
                    raise SceneError(f"{where}.poses: bad frame key {k!r}") from None
                poses[frame] = _pose_from_json(p, f"{where}.poses[{k}]")
            objects.append(
                ObjectTrack(
                    track_id=req(o, "track_id", where + "."),
                    extents=_tuple3(req(o, "extents", where + "."), where + ".extents"),
                    shape=o.get("shape", "car_lowpoly"),
                    albedo=_tuple3(o.get("albedo", (0.6, 0.1, 0.1)), where + ".albedo"),
                    poses=poses,
                )
            )
        props = tuple(
            StaticProp(
                _tuple3(req(p, "extents", f"static_props[{i}]."), f"static_props[{i}].extents"),
                _pose_from_json(req(p, "pose", f"static_props[{i}]."), f"static_props[{i}].pose"),
                _tuple3(p.get("albedo", (0.5, 0.5, 0.5)), f"static_props[{i}].albedo"),
            )
            for i, p in enumerate(d.get("static_props", []))
        )
        g = d.get("ground_plane", {})
        ground = GroundPlane(float(g.get("height", 0.0)), _tuple3(g.get("albedo", (0.35,) * 3), "ground_plane.albedo"))
        li = d.get("lighting", {})
        default_light = Lighting()
        lighting = Lighting(
            _tuple3(li.get("sun_direction", default_light.sun_direction), "lighting.sun_direction"),
            float(li.get("sun_intensity", default_light.sun_intensity)),
            _tuple3(li.get("sun_color", default_light.sun_color), "lighting.sun_color"),
            float(li.get("ambient_intensity", default_light.ambient_intensity)),
            li.get("preset", "clone"),
        )
        w = d.get("weather", {})
        weather = Weather(
            float(w.get("fog_beta", 0.0)),
            _tuple3(w.get("fog_color", Weather().fog_color), "weather.fog_color"),
            float(w.get("rain_intensity", 0.0)),
        )
        scene = SceneDescription(
            frame_count=fc,
            fps=float(d.get("fps", 10.0)),
            intrinsics=intrinsics,
            camera_poses=cams,
            objects=tuple(objects),
            static_props=props,
            ground_plane=ground,
            lighting=lighting,
            weather=weather,
            seed=int(d.get("seed", 0)),
            eval_filter=d.get("eval_filter"),
        )
    except SceneError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise SceneError(f"malformed scene: {e!r}") from None
    return scene.validate()


def load_scene(path) -> SceneDescription:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(d, dict):
        raise SceneError(f"{path}: top level must be an object")
    try:
        return scene_from_dict(d)
    except SceneError as e:
        raise SceneError(f"{path}: {e}") from None


def save_scene(scene: SceneDescription, path) -> None:
    scene.validate()
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Variations


def sun_direction(elevation_deg: float, azimuth_deg: float) -> tuple[float, float, float]:
    """Unit vector towards the sun; azimuth 0 is +z, 90 is +x."""
    e, a = math.radians(elevation_deg), math.radians(azimuth_deg)
    return (math.cos(e) * math.sin(a), -math.sin(e), math.cos(e) * math.cos(a))


LIGHTING_PRESETS = {
    "clone": Lighting(),
    "morning": Lighting(sun_direction(15.0, 90.0), 0.9, (1.0, 0.9, 0.7), 0.3, "morning"),
    "sunset": Lighting(sun_direction(8.0, -90.0), 0.7, (1.0, 0.6, 0.4), 0.25, "sunset"),
    "overcast": Lighting(Lighting().sun_direction, 0.0, (1.0, 1.0, 1.0), 0.8, "overcast"),
}

_OVERRIDE_KEYS = {
    "rotation_deg", "fog_beta", "rain_intensity",
    "sun_direction", "sun_intensity", "sun_color", "ambient_intensity", "preset",
}


@dataclass(frozen=True)
class VariationSpec:
    kind: str = "clone"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in VARIATION_KINDS:
            raise SceneError(f"variation: unknown kind {self.kind!r}")
        unknown = set(self.params) - _OVERRIDE_KEYS
        if unknown:
            raise SceneError(f"variation: unknown override(s) {sorted(unknown)}")
        if self.kind == "custom" and not self.params:
            raise SceneError("variation: kind 'custom' requires at least one override")

    @property
    def name(self) -> str:
        return self.kind

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind}
        if self.params:
            d["params"] = dict(self.params)
        return d

    @classmethod
    def parse(cls, v) -> "VariationSpec":
        if isinstance(v, VariationSpec):
            return v
        if isinstance(v, str):
            return cls(v)
        if not isinstance(v, Mapping) or "kind" not in v:
            raise SceneError(f"variation: expected a kind name or {{\"kind\": ..., \"params\": ...}}, got {v!r}")
        unknown = set(v) - {"kind", "params"}
        if unknown:
            raise SceneError(f"variation: unknown key(s) {sorted(unknown)}")
        return cls(v["kind"], dict(v.get("params") or {}))


def apply_variation(scene: SceneDescription, v: VariationSpec) -> SceneDescription:
    """Return the scene under a named condition change, everything else equal."""
    v = VariationSpec.parse(v)
    if v.kind == "clone":
        return scene
    p = dict(v.params)
    rotation = {"rotate_right_15": ROTATION_DEG, "rotate_left_15": -ROTATION_DEG}.get(v.kind, 0.0)
    rotation = float(p.pop("rotation_deg", rotation))
    lighting = LIGHTING_PRESETS[v.kind] if v.kind in LIGHTING_PRESETS else scene.lighting
    weather = scene.weather
    if v.kind == "fog":
        weather = dataclasses.replace(weather, fog_beta=FOG_BETA)
    if v.kind == "rain":
        weather = dataclasses.replace(weather, rain_intensity=RAIN_INTENSITY)
    if "fog_beta" in p:
        weather = dataclasses.replace(weather, fog_beta=float(p.pop("fog_beta")))
    if "rain_intensity" in p:
        weather = dataclasses.replace(weather, rain_intensity=float(p.pop("rain_intensity")))
    light_over = {}
    for k in ("sun_direction", "sun_color"):
        if k in p:
            light_over[k] = tuple(float(x) for x in p.pop(k))
    for k in ("sun_intensity", "ambient_intensity"):
        if k in p:
            light_over[k] = float(p.pop(k))
    if "preset" in p:
        light_over["preset"] = p.pop("preset")
    if light_over:
        lighting = dataclasses.replace(lighting, **light_over)
    cams = scene.camera_poses
    if rotation:
        r = math.radians(rotation)
        cams = tuple(dataclasses.replace(c, yaw=c.yaw + r) for c in cams)
    out = dataclasses.replace(scene, camera_poses=cams, lighting=lighting, weather=weather)
    return out.validate()


# ---------------------------------------------------------------------------
# Procedural seed scenes


class SceneGenerationError(RuntimeError):
    """Objects could not be placed without interpenetration."""


@dataclass(frozen=True)
class SeedParams:
    n_objects: int = 5
    frame_count: int = 120
    style: str = "urban"
    fps: float = 10.0
    intrinsics: CameraIntrinsics = CameraIntrinsics()


_CAR_COLORS = (
    (0.70, 0.10, 0.10), (0.10, 0.25, 0.60), (0.85, 0.85, 0.85), (0.15, 0.15, 0.15),
    (0.60, 0.60, 0.62), (0.10, 0.45, 0.20), (0.80, 0.60, 0.10), (0.45, 0.30, 0.20),
)

MAX_YAW_RATE = 0.5
_PLACEMENT_ATTEMPTS = 1000


def _integrate(x0, z0, yaw0, speed, yaw_rate_fn, n, dt):
    """Unicycle integration (exact per step for piecewise-constant yaw rate)."""
    xs, zs, yaws = np.empty(n), np.empty(n), np.empty(n)
    x, z, yaw = x0, z0, yaw0
    for i in range(n):
        xs[i], zs[i], yaws[i] = x, z, yaw
        w = yaw_rate_fn(i)
        if abs(w) < 1e-12:
            x += speed * math.sin(yaw) * dt
            z += speed * math.cos(yaw) * dt
        else:
            r = speed / w
            nyaw = yaw + w * dt
            x += r * (math.cos(yaw) - math.cos(nyaw))
            z += r * (math.sin(nyaw) - math.sin(yaw))
            yaw = nyaw
    return xs, zs, yaws


def _camera_path(style: str, n: int, dt: float, rng: np.random.Generator):
    if style == "static_camera":
        return np.zeros(n), np.zeros(n), np.zeros(n), 0.0
    speed = {"urban": 6.0, "intersection": 3.5, "highway": 22.0}[style]
    speed *= rng.uniform(0.9, 1.1)
    # one gentle turn segment, well inside the yaw-rate bound
    w = rng.uniform(-0.04, 0.04)
    t0 = int(rng.integers(0, max(n // 2, 1)))
    t1 = t0 + n // 4
    xs, zs, yaws = _integrate(0.0, 0.0, 0.0, speed, lambda i: w if t0 <= i < t1 else 0.0, n, dt)
    return xs, zs, yaws, speed


def _sample_object(style, rng, n, dt, cam_speed):
    """One candidate trajectory: (xs, zs, yaws, extents, first, last)."""
    length = rng.uniform(3.8, 4.8)
    width = rng.uniform(1.6, 1.9)
    height = rng.uniform(1.4, 1.7)
    horizon = max(cam_speed * n * dt, 1.0)
    turn = 0.0
    if style == "urban":
        role = rng.choice(["lead", "oncoming", "parked_r", "parked_l"], p=[0.25, 0.35, 0.25, 0.15])
        if role == "lead":
            x0, yaw0, speed = 0.0, 0.0, cam_speed * rng.uniform(0.9, 1.15)
            z0 = rng.uniform(8.0, 25.0)
        elif role == "oncoming":
            x0, yaw0, speed = -3.5, math.pi, rng.uniform(4.0, 9.0)
            z0 = rng.uniform(15.0, 15.0 + 0.8 * (horizon + speed * n * dt))
        else:
            x0 = 4.0 if role == "parked_r" else -7.0
            yaw0, speed = (0.0 if rng.random() < 0.5 else math.pi), 0.0
            z0 = rng.uniform(5.0, 10.0 + horizon)
    elif style == "highway":
        lane = rng.choice([-3.7, 0.0, 3.7, 7.4])
        x0, yaw0 = float(lane), 0.0
        speed = cam_speed * rng.uniform(0.8, 1.2)
        z0 = rng.uniform(8.0, 70.0)
    else:
        # crossing traffic on a road perpendicular to the camera's view
        cross_z = 25.0 if style == "intersection" else 18.0
        role = rng.choice(["cross_pos", "cross_neg", "along"], p=[0.4, 0.4, 0.2])
        if role == "along":
            x0, yaw0 = -3.5, math.pi
            speed = rng.uniform(2.0, 6.0)
            z0 = rng.uniform(cross_z + 6.0, cross_z + 35.0)
        else:
            sgn = 1.0 if role == "cross_pos" else -1.0
            yaw0 = sgn * math.pi / 2
            speed = rng.uniform(3.0, 8.0)
            x0 = -sgn * rng.uniform(5.0, 45.0)
            z0 = cross_z + (-1.75 if sgn > 0 else 1.75)
            if rng.random() < 0.3:
                turn = rng.uniform(-0.3, 0.3)
    t_turn0 = int(rng.integers(0, n))
    t_turn1 = t_turn0 + int(rng.integers(5, 25))
    xs, zs, yaws = _integrate(
        x0, z0, yaw0, speed, lambda i: turn if t_turn0 <= i < t_turn1 else 0.0, n, dt
    )
    first, last = 0, n - 1
    if n > 4 and rng.random() < 0.3:
        if rng.random() < 0.5:
            first = int(rng.integers(1, n // 2 + 1))
        else:
            last = int(rng.integers(n // 2, n - 1))
    return xs, zs, yaws, (length, width, height), first, last


def _props(style, rng, cam_x, cam_z):
    """Buildings along both road sides, leaving gaps at crossing roads."""
    props = []
    if style == "highway":
        return props
    z_min, z_max = float(cam_z.min()) - 10.0, float(cam_z.max()) + 90.0
    gap = (20.0, 31.0) if style == "intersection" else (12.0, 25.0) if style == "static_camera" else None
    for side in (-1.0, 1.0):
        z = z_min
        while z < z_max:
            length = rng.uniform(8.0, 20.0)
            zc = z + length / 2
            if gap is None or z + length < gap[0] or z > gap[1]:
                width = rng.uniform(6.0, 10.0)
                height = rng.uniform(5.0, 14.0)
                x = side * (11.0 + width / 2 + rng.uniform(0.0, 2.0))
                shade = rng.uniform(0.35, 0.75)
                albedo = (shade, shade * rng.uniform(0.85, 1.0), shade * rng.uniform(0.75, 1.0))
                props.append(StaticProp((length, width, height), Pose((x, -height / 2, zc)), albedo))
            z += length + rng.uniform(2.0, 6.0)
    return props


def generate_seed_scene(
    seed: int,
    n_objects: int = 5,
    frame_count: int = 120,
    style: str = "urban",
    *,
    fps: float = 10.0,
    intrinsics: CameraIntrinsics | None = None,
) -> SceneDescription:
    """Procedural stand-in for a real seed sequence of the given motion style.

    Deterministic in all arguments. Cars follow constant-speed segments with
    yaw rate bounded by ``MAX_YAW_RATE`` and never overlap each other (or the
    ego vehicle) in any frame.
    """
    if n_objects < 0 or frame_count < 1:
        raise ValueError("n_objects must be >= 0 and frame_count >= 1")
    if style not in MOTION_STYLES:
        raise ValueError(f"unknown motion style {style!r}")
    intrinsics = intrinsics or CameraIntrinsics()
    rng = np.random.default_rng([seed, MOTION_STYLES.index(style)])
    dt = 1.0 / fps
    n = frame_count
    cam_x, cam_z, cam_yaw, cam_speed = _camera_path(style, n, dt, rng)
    cam_y = -KITTI_HEIGHT
    cameras = tuple(
        Pose((float(cam_x[i]), cam_y, float(cam_z[i])), float(cam_yaw[i])) for i in range(n)
    )
    # ego vehicle footprint (camera sits near the windshield)
    occupied: list[dict[int, np.ndarray]] = []
    if style != "static_camera":
        occupied.append({
            i: geo.footprint(
                (cam_x[i] - 1.0 * math.sin(cam_yaw[i]), cam_z[i] - 1.0 * math.cos(cam_yaw[i])),
                cam_yaw[i], 4.6, 1.9)
            for i in range(n)
        })
    else:
        occupied.append({i: geo.footprint((0.0, 0.0), 0.0, 1.0, 1.0) for i in range(n)})

    objects = []
    for k in range(n_objects):
        for _attempt in range(_PLACEMENT_ATTEMPTS):
            xs, zs, yaws, ext, first, last = _sample_object(style, rng, n, dt, cam_speed)
            fps_ = {
                i: geo.footprint((xs[i], zs[i]), yaws[i], ext[0], ext[1])
                for i in range(first, last + 1)
            }
            clash = any(
                i in other and geo.rectangles_overlap(fp, other[i], margin=0.3)
                for other in occupied
                for i, fp in fps_.items()
            )
            if not clash:
                break
        else:
            raise SceneGenerationError(
                f"could not place object {k} of {n_objects} without overlap "
                f"after {_PLACEMENT_ATTEMPTS} attempts"
            )
        occupied.append(fps_)
        color = _CAR_COLORS[int(rng.integers(len(_CAR_COLORS)))]
        poses = {
            i: Pose((float(xs[i]), -ext[2] / 2, float(zs[i])), float(yaws[i]))
            for i in range(first, last + 1)
        }
        objects.append(ObjectTrack(k + 1, tuple(float(e) for e in ext), "car_lowpoly", color, poses))

    props = _props(style, rng, cam_x, cam_z)
    scene = SceneDescription(
        frame_count=n,
        fps=fps,
        intrinsics=intrinsics,
        camera_poses=cameras,
        objects=tuple(objects),
        static_props=tuple(props),
        seed=int(seed),
    )
    return scene.validate()
