"""Patch geometry, extraction, overlap-averaged fusion, and bicubic upsampling.

Window/stride tilings must partition the grid exactly: (grid - window) must
be divisible by the stride on each axis. Rectangles are enumerated row-major
by (top, left); that order is the canonical iteration order everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .util import as_grid


class GeometryError(ValueError):
    """Window/stride geometry does not tile the grid exactly."""


class Rect(NamedTuple):
    top: int
    left: int
    height: int
    width: int


@dataclass(frozen=True)
class PatchLayout:
    grid_h: int
    grid_w: int
    win_h: int
    win_w: int
    stride_h: int
    stride_w: int
    rects: tuple[Rect, ...]

    @property
    def patch_count(self) -> int:
        return len(self.rects)

    def to_dict(self) -> dict:
        """JSON-ready description used by the caption-manifest skeleton."""
        return {
            "grid": [self.grid_h, self.grid_w],
            "window": [self.win_h, self.win_w],
            "stride": [self.stride_h, self.stride_w],
            "patch_count": self.patch_count,
            "rects": [list(r) for r in self.rects],
        }


def _axis_positions(grid: int, win: int, stride: int, axis: str) -> range:
    if win < 1 or win > grid:
        raise GeometryError(f"{axis} axis: window {win} must lie in [1, grid {grid}]")
    if stride < 1:
        raise GeometryError(f"{axis} axis: stride {stride} must be >= 1")
    span = grid - win
    if span % stride != 0:
        suggestion = _nearest_valid_stride(span, stride)
        raise GeometryError(
            f"{axis} axis: (grid {grid} - window {win}) = {span} is not divisible "
            f"by stride {stride}; nearest valid stride is {suggestion}"
        )
    return range(0, span + 1, stride)


def _nearest_valid_stride(span: int, stride: int) -> int:
    # Valid strides are the divisors of the leftover span.
    divisors = [d for d in range(1, span + 1) if span % d == 0]
    return min(divisors, key=lambda d: (abs(d - stride), d))


def plan_patches(
    grid_h: int, grid_w: int, win_h: int, win_w: int, stride_h: int, stride_w: int
) -> PatchLayout:
    """Enumerate the overlapping window positions covering a grid.

    The patch count is ((grid_h - win_h)/stride_h + 1) * ((grid_w - win_w)/stride_w + 1);
    non-divisible geometry raises a GeometryError naming the offending axis
    rather than silently clamping.
    """
    tops = _axis_positions(int(grid_h), int(win_h), int(stride_h), "height")
    lefts = _axis_positions(int(grid_w), int(win_w), int(stride_w), "width")
    rects = tuple(
        Rect(top, left, int(win_h), int(win_w)) for top in tops for left in lefts
    )
    return PatchLayout(
        grid_h=int(grid_h),
        grid_w=int(grid_w),
        win_h=int(win_h),
        win_w=int(win_w),
        stride_h=int(stride_h),
        stride_w=int(stride_w),
        rects=rects,
    )


def extract_patch(g: np.ndarray, rect: Rect) -> np.ndarray:
    """Copy the sub-grid covered by ``rect``."""
    g = as_grid(g, "grid")
    top, left, h, w = rect
    if top < 0 or left < 0 or h < 1 or w < 1 or top + h > g.shape[0] or left + w > g.shape[1]:
        raise ValueError(f"rect {tuple(rect)} out of bounds for grid {g.shape[:2]}")
    return g[top : top + h, left : left + w, :].copy()


def fuse_patches(patches: Sequence[np.ndarray], layout: PatchLayout) -> np.ndarray:
    """Average overlapping patches back onto the full grid.

    Each output cell is the mean of the covering patches' values there.
    Accumulation runs in canonical rect order and is computed as
    "first covering value + mean of deviations from it", which makes cells
    where all covering patches agree pass through bit-exact (a plain
    sum/count would round at cover counts that are not powers of two).
    """
    if len(patches) != layout.patch_count:
        raise ValueError(f"expected {layout.patch_count} patches, got {len(patches)}")
    grids = [as_grid(p, f"patches[{i}]") for i, p in enumerate(patches)]
    channels = grids[0].shape[2]
    for i, p in enumerate(grids):
        if p.shape != (layout.win_h, layout.win_w, channels):
            raise ValueError(
                f"patches[{i}] has shape {p.shape}, expected "
                f"({layout.win_h}, {layout.win_w}, {channels})"
            )

    base = np.zeros((layout.grid_h, layout.grid_w, channels))
    count = np.zeros((layout.grid_h, layout.grid_w), dtype=np.int64)
    for patch, (top, left, h, w) in zip(grids, layout.rects):
        region = np.s_[top : top + h, left : left + w]
        fresh = count[region] == 0
        base[region][fresh] = patch[fresh]
        count[region] += 1
    if (count == 0).any():
        raise ValueError("layout does not cover the full grid")

    deviation = np.zeros_like(base)
    for patch, (top, left, h, w) in zip(grids, layout.rects):
        region = np.s_[top : top + h, left : left + w]
        deviation[region] += patch - base[region]
    return base + deviation / count[:, :, None]


def _keys_cubic(x: np.ndarray) -> np.ndarray:
    """Cubic convolution kernel with a = -0.5 (Catmull-Rom)."""
    ax = np.abs(x)
    out = np.zeros_like(ax)
    near = ax <= 1.0
    far = (ax > 1.0) & (ax < 2.0)
    out[near] = (1.5 * ax[near] - 2.5) * ax[near] ** 2 + 1.0
    out[far] = ((-0.5 * ax[far] + 2.5) * ax[far] - 4.0) * ax[far] + 2.0
    return out


def _resample_axis(length_in: int, length_out: int):
    """4-tap indices and normalized weights for one axis, half-pixel aligned."""
    dst = np.arange(length_out, dtype=np.float64)
    src = (dst + 0.5) * (length_in / length_out) - 0.5
    i0 = np.floor(src).astype(np.int64)
    frac = src - i0
    offsets = np.array([-1, 0, 1, 2], dtype=np.int64)
    idx = np.clip(i0[:, None] + offsets[None, :], 0, length_in - 1)
    weights = _keys_cubic(frac[:, None] - offsets[None, :].astype(np.float64))
    weights /= weights.sum(axis=1, keepdims=True)
    return idx, weights


def bicubic_upsample(g: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bicubic upsampling (Keys a = -0.5, half-pixel centers,
    clamp-to-edge borders). Output dims must not shrink either axis."""
    g = as_grid(g, "grid")
    in_h, in_w = g.shape[0], g.shape[1]
    out_h, out_w = int(out_h), int(out_w)
    if out_h < in_h or out_w < in_w:
        raise ValueError(
            f"downscaling not supported: requested ({out_h}, {out_w}) from ({in_h}, {in_w})"
        )
    idx_r, w_r = _resample_axis(in_h, out_h)
    idx_c, w_c = _resample_axis(in_w, out_w)
    # rows first: (out_h, 4, in_w, C) taps reduced against row weights
    rows = np.einsum("ok,okwc->owc", w_r, g[idx_r, :, :])
    return np.einsum("ok,hokc->hoc", w_c, rows[:, idx_c, :])
