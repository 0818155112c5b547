"""Weather post-effects on the color pass."""

from __future__ import annotations

import numpy as np

RAIN_STREAKS_MAX = 400
RAIN_ALPHA = 0.35
RAIN_COLOR = np.array([0.82, 0.84, 0.88])
RAIN_LENGTH = (8.0, 25.0)
RAIN_SLOPE_DEG = 10.0
_RAIN_STREAM = 0x52414E  # keeps rain draws apart from other seeded streams


def fog_transmittance(depth, fog_beta: float):
    """Fraction of surface radiance surviving ``depth`` meters of fog."""
    if fog_beta == 0:
        return np.ones_like(np.asarray(depth, dtype=float))
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(-fog_beta * np.asarray(depth, dtype=float))


def apply_fog(color, depth, weather):
    """Blend towards the fog color with exponential extinction over depth."""
    color = np.asarray(color, dtype=float)
    if weather.fog_beta == 0:
        return color
    v = fog_transmittance(depth, weather.fog_beta)
    v = np.where(np.isinf(depth), 0.0, v)[..., None] if color.ndim > 1 else v
    return v * color + (1.0 - v) * np.asarray(weather.fog_color, dtype=float)


def rain_streaks(width: int, height: int, intensity: float, seed) -> list[np.ndarray]:
    """Pixel coordinates (k, 2) as (row, col) of each rain streak.

    ``round(intensity * 400)`` near-vertical streaks, deterministic in
    ``seed`` (any int or tuple of ints).
    """
    n = int(round(intensity * RAIN_STREAKS_MAX))
    if n == 0:
        return []
    key = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    rng = np.random.default_rng([_RAIN_STREAM, *[int(k) for k in key]])
    x0 = rng.uniform(0, width, n)
    y0 = rng.uniform(-RAIN_LENGTH[1], height, n)
    length = rng.uniform(*RAIN_LENGTH, n)
    slope = np.radians(rng.uniform(-RAIN_SLOPE_DEG, RAIN_SLOPE_DEG, n))
    streaks = []
    for i in range(n):
        s = np.arange(0.0, length[i], 0.5)
        cols = np.floor(x0[i] + s * np.sin(slope[i])).astype(int)
        rows = np.floor(y0[i] + s * np.cos(slope[i])).astype(int)
        pts = np.unique(np.stack([rows, cols], axis=1), axis=0)
        streaks.append(pts)
    return streaks


def rain_mask(width: int, height: int, intensity: float, seed) -> np.ndarray:
    """Per-pixel count of streaks covering it."""
    count = np.zeros((height, width), dtype=np.int32)
    for pts in rain_streaks(width, height, intensity, seed):
        r, c = pts[:, 0], pts[:, 1]
        ok = (r >= 0) & (r < height) & (c >= 0) & (c < width)
        np.add.at(count, (r[ok], c[ok]), 1)
    return count


def apply_rain(color: np.ndarray, rain_intensity: float, seed) -> np.ndarray:
    """Overlay semi-transparent streaks; a color-only effect."""
    if rain_intensity == 0:
        return color
    h, w = color.shape[:2]
    count = rain_mask(w, h, rain_intensity, seed)
    alpha = 1.0 - (1.0 - RAIN_ALPHA) ** count
    return color * (1.0 - alpha[..., None]) + RAIN_COLOR * alpha[..., None]
