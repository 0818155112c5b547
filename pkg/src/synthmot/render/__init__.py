from .camera import CameraMatrices, Z_FAR, Z_NEAR, compute_camera_matrices, frustum_planes, project
from .effects import apply_fog, apply_rain, fog_transmittance, rain_streaks
from .frame import FrameBuffers, flow_pass, render_frame, render_instance

__all__ = [
    "CameraMatrices", "FrameBuffers", "Z_FAR", "Z_NEAR", "apply_fog", "apply_rain",
    "compute_camera_matrices", "flow_pass", "fog_transmittance", "frustum_planes",
    "project", "rain_streaks", "render_frame", "render_instance",
]
