"""Terrain description: flat planes and bilinear heightfields with penalty contact.

The flat mode is exactly the heightfield query specialized to zero heights,
so a zero-amplitude heightfield reproduces flat-ground results bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidStateError

MODE_FLAT = 0
MODE_HEIGHTFIELD = 1


@dataclass(frozen=True)
class TerrainSpec:
    mode: str = "flat"                    # "flat" | "heightfield"
    friction: float = 0.8
    contact_stiffness: float = 30000.0    # N/m
    # 100 N*s/m is the stability limit of the explicit integrator against the
    # foot's apparent mass at the 1 ms physics rate; larger values chatter.
    contact_damping: float = 100.0        # N*s/m
    heights: np.ndarray | None = None     # (rows, cols) m, row-major y then x
    resolution: float = 0.05              # m per grid cell
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))  # (x0, y0)

    def validate(self) -> None:
        if self.mode not in ("flat", "heightfield"):
            raise InvalidStateError(f"unknown terrain mode {self.mode!r}")
        if self.friction < 0.0:
            raise InvalidStateError("friction coefficient must be >= 0")
        if self.contact_stiffness <= 0.0:
            raise InvalidStateError("contact stiffness must be > 0")
        if self.contact_damping < 0.0:
            raise InvalidStateError("contact damping must be >= 0")
        if self.mode == "heightfield":
            if self.heights is None or self.heights.ndim != 2:
                raise InvalidStateError("heightfield mode requires a 2-D grid")
            if not np.all(np.isfinite(self.heights)):
                raise InvalidStateError("heightfield contains non-finite heights")
            if self.resolution <= 0.0:
                raise InvalidStateError("heightfield resolution must be > 0")

    def pack(self) -> tuple:
        """Positional-array form for the kernels."""
        self.validate()
        if self.mode == "flat":
            grid = np.zeros((1, 1))
            mode = MODE_FLAT
        else:
            grid = np.ascontiguousarray(self.heights, dtype=np.float64)
            mode = MODE_HEIGHTFIELD
        return (
            mode,
            float(self.friction),
            float(self.contact_stiffness),
            float(self.contact_damping),
            grid,
            float(self.resolution),
            np.ascontiguousarray(self.origin, dtype=np.float64),
        )

    def height_at(self, x: float, y: float) -> float:
        h, _, _ = terrain_sample(self, x, y)
        return h


def terrain_sample(terrain: TerrainSpec, x: float, y: float):
    """Height and gradient at (x, y) via bilinear interpolation (clamped edges)."""
    if terrain.mode == "flat":
        return 0.0, 0.0, 0.0
    grid = terrain.heights
    res = terrain.resolution
    gx = (x - terrain.origin[0]) / res
    gy = (y - terrain.origin[1]) / res
    rows, cols = grid.shape
    gx = min(max(gx, 0.0), cols - 1.0)
    gy = min(max(gy, 0.0), rows - 1.0)
    i0 = min(int(gx), cols - 2) if cols > 1 else 0
    j0 = min(int(gy), rows - 2) if rows > 1 else 0
    if cols == 1 or rows == 1:
        return float(grid[j0, i0]), 0.0, 0.0
    fx, fy = gx - i0, gy - j0
    h00, h10 = grid[j0, i0], grid[j0, i0 + 1]
    h01, h11 = grid[j0 + 1, i0], grid[j0 + 1, i0 + 1]
    h = (1 - fx) * (1 - fy) * h00 + fx * (1 - fy) * h10 \
        + (1 - fx) * fy * h01 + fx * fy * h11
    dhdx = ((1 - fy) * (h10 - h00) + fy * (h11 - h01)) / res
    dhdy = ((1 - fx) * (h01 - h00) + fx * (h11 - h10)) / res
    return float(h), float(dhdx), float(dhdy)


def flat_terrain(friction: float = 0.8, **kwargs) -> TerrainSpec:
    t = TerrainSpec(mode="flat", friction=friction, **kwargs)
    t.validate()
    return t


def heightfield_terrain(
    heights: np.ndarray,
    resolution: float,
    origin=(0.0, 0.0),
    friction: float = 0.8,
    **kwargs,
) -> TerrainSpec:
    t = TerrainSpec(
        mode="heightfield",
        friction=friction,
        heights=np.asarray(heights, dtype=np.float64),
        resolution=resolution,
        origin=np.asarray(origin, dtype=np.float64),
        **kwargs,
    )
    t.validate()
    return t


def heightfield_from_csv(
    path, resolution: float, origin=(0.0, 0.0), friction: float = 0.8, **kwargs
) -> TerrainSpec:
    """Load a row-major CSV grid of heights in meters."""
    heights = np.loadtxt(path, delimiter=",", ndmin=2)
    return heightfield_terrain(heights, resolution, origin, friction, **kwargs)


def rough_terrain(
    seed: int,
    amplitude: float = 0.04,
    correlation_length: float = 0.3,
    extent=((-2.0, 32.0), (-3.0, 3.0)),
    resolution: float = 0.05,
    friction: float = 0.8,
    flat_radius: float = 0.6,
    **kwargs,
) -> TerrainSpec:
    """Seeded smooth random heightfield, peak amplitude `amplitude`.

    A disc of radius `flat_radius` around the origin is blended to zero so
    every episode starts from the same stance geometry.
    """
    (x0, x1), (y0, y1) = extent
    cols = int(round((x1 - x0) / resolution)) + 1
    rows = int(round((y1 - y0) / resolution)) + 1
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((rows, cols))
    sigma_cells = correlation_length / resolution
    kernel_half = int(3 * sigma_cells)
    xs = np.arange(-kernel_half, kernel_half + 1)
    kernel = np.exp(-0.5 * (xs / sigma_cells) ** 2)
    kernel /= kernel.sum()
    smooth = np.apply_along_axis(
        lambda m: np.convolve(m, kernel, mode="same"), 0, noise
    )
    smooth = np.apply_along_axis(
        lambda m: np.convolve(m, kernel, mode="same"), 1, smooth
    )
    peak = np.abs(smooth).max()
    if peak > 0.0 and amplitude > 0.0:
        smooth *= amplitude / peak
    else:
        smooth[:] = 0.0
    gx = x0 + resolution * np.arange(cols)
    gy = y0 + resolution * np.arange(rows)
    xx, yy = np.meshgrid(gx, gy)
    r = np.hypot(xx, yy)
    blend = np.clip((r - flat_radius) / flat_radius, 0.0, 1.0)
    smooth *= blend
    return heightfield_terrain(
        smooth, resolution, origin=(x0, y0), friction=friction, **kwargs
    )
