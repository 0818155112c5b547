import dataclasses
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from synthmot.scene import (
    CameraIntrinsics, ObjectTrack, Pose, SceneDescription, generate_seed_scene,
)

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


SMALL = CameraIntrinsics(100.0, 100.0, 50.0, 50.0, 100, 100)


def make_scene(objects=(), frames=1, intr=SMALL, camera=None, **kw) -> SceneDescription:
    cams = camera if camera is not None else tuple(Pose() for _ in range(frames))
    return SceneDescription(
        frame_count=frames, fps=10.0, intrinsics=intr, camera_poses=tuple(cams),
        objects=tuple(objects), **kw,
    ).validate()


def static_box(track_id, center, extents=(2.0, 2.0, 2.0), frames=1, shape="cuboid", yaw=0.0):
    return ObjectTrack(track_id, extents, shape, (0.5, 0.5, 0.5),
                       {t: Pose(tuple(center), yaw) for t in range(frames)})


@pytest.fixture(scope="session")
def urban30():
    """30-frame urban seed scene at half resolution."""
    sc = generate_seed_scene(3, 10, 30, "urban")
    return dataclasses.replace(sc, intrinsics=sc.intrinsics.scaled(0.5))


@pytest.fixture(scope="session")
def fixture_scene_path():
    return FIXTURES / "seed_urban.scene"
