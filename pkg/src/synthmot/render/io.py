"""Buffer file formats: PPM color, PFM depth, 16-bit PGM instance, FLO1 flow."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

PFM_INF = np.float32(3.4e38)
FLO_MAGIC = b"FLO1"

PASS_EXT = {"color": "ppm", "depth": "pfm", "instance": "pgm", "flow": "flo"}


def frame_path(root, pass_name: str, frame: int) -> Path:
    return Path(root) / pass_name / f"{frame:06d}.{PASS_EXT[pass_name]}"


def encode_ppm(color: np.ndarray) -> bytes:
    h, w = color.shape[:2]
    data = np.clip(np.rint(color * 255.0), 0, 255).astype(np.uint8)
    return b"P6\n%d %d\n255\n" % (w, h) + data.tobytes()


def encode_pgm16(instance: np.ndarray) -> bytes:
    h, w = instance.shape
    if instance.min(initial=0) < 0 or instance.max(initial=0) > 65535:
        raise ValueError("instance ids must fit in 16 bits")
    return b"P5\n%d %d\n65535\n" % (w, h) + instance.astype(">u2").tobytes()


def encode_pfm(depth: np.ndarray) -> bytes:
    """Little-endian single-channel PFM, rows stored bottom to top."""
    h, w = depth.shape
    d = np.where(np.isinf(depth), PFM_INF, depth).astype("<f4")
    return b"Pf\n%d %d\n-1.0\n" % (w, h) + d[::-1].tobytes()


def encode_flo(flow: np.ndarray, valid: np.ndarray) -> bytes:
    h, w = valid.shape
    header = FLO_MAGIC + np.array([w, h], dtype="<i4").tobytes()
    return header + flow.astype("<f4").tobytes() + valid.astype(np.uint8).tobytes()


_HEADER = re.compile(rb"^(P[56]|Pf)\s+(\d+)\s+(\d+)\s+(\S+)\s")


def _header(data: bytes):
    m = _HEADER.match(data)
    if not m:
        raise ValueError("unrecognized image header")
    return m.group(1), int(m.group(2)), int(m.group(3)), m.group(4), m.end()


def decode_ppm(data: bytes) -> np.ndarray:
    magic, w, h, _, off = _header(data)
    assert magic == b"P6"
    return np.frombuffer(data, np.uint8, w * h * 3, off).reshape(h, w, 3)


def decode_pgm16(data: bytes) -> np.ndarray:
    magic, w, h, _, off = _header(data)
    assert magic == b"P5"
    return np.frombuffer(data, ">u2", w * h, off).reshape(h, w).astype(np.int32)


def decode_pfm(data: bytes) -> np.ndarray:
    magic, w, h, scale, off = _header(data)
    assert magic == b"Pf"
    dtype = "<f4" if float(scale) < 0 else ">f4"
    d = np.frombuffer(data, dtype, w * h, off).reshape(h, w)[::-1].astype(np.float64)
    return np.where(d >= PFM_INF, np.inf, d)


def decode_flo(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    if data[:4] != FLO_MAGIC:
        raise ValueError("not a FLO1 file")
    w, h = np.frombuffer(data, "<i4", 2, 4)
    off = 12
    flow = np.frombuffer(data, "<f4", w * h * 2, off).reshape(h, w, 2)
    valid = np.frombuffer(data, np.uint8, w * h, off + 8 * w * h).reshape(h, w).astype(bool)
    return flow.astype(np.float64), valid


def write_frame(root, frame: int, buffers) -> None:
    encoded = {
        "color": encode_ppm(buffers.color),
        "depth": encode_pfm(buffers.depth),
        "instance": encode_pgm16(buffers.instance),
        "flow": encode_flo(buffers.flow, buffers.flow_valid),
    }
    for name, data in encoded.items():
        path = frame_path(root, name, frame)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
