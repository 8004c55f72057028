"""Synthetic coordinates from a population-density grid.

Cells whose centres fall inside the region are drawn with replacement,
weighted by density; each draw is jittered by independent uniform noise on
both axes and rejected (with a fresh cell draw) if it lands outside the
region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, SamplingError, ValidationError

DEFAULT_MAX_ATTEMPTS = 1000
EARTH_RADIUS_KM = 6371.0088


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90 <= self.lat <= 90 and -180 <= self.lon <= 180):
            raise ValidationError(f"({self.lat}, {self.lon}) is not a WGS84 position")


def _ring_test(x, y, ring):
    """Return (inside, on_edge) boolean arrays for one implicitly closed ring."""
    r = np.asarray(ring, dtype=float)
    ys, xs = r[:, 0], r[:, 1]
    xe, ye = np.roll(xs, -1), np.roll(ys, -1)
    inside = np.zeros(x.shape, dtype=bool)
    edge = np.zeros(x.shape, dtype=bool)
    for xi, yi, xj, yj in zip(xs, ys, xe, ye):
        dx, dy = xj - xi, yj - yi
        cross = dx * (y - yi) - dy * (x - xi)
        scale = max(abs(dx), abs(dy), 1e-300)
        edge |= ((np.abs(cross) <= 1e-12 * scale)
                 & (x >= min(xi, xj)) & (x <= max(xi, xj))
                 & (y >= min(yi, yj)) & (y <= max(yi, yj)))
        straddle = (yi > y) != (yj > y)
        if np.any(straddle):
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = xi + dx * (y - yi) / dy
            inside ^= straddle & (x < xint)
    return inside, edge


def points_in_polygon(lat, lon, boundary):
    """Vectorised even-odd test; points on any ring edge count as inside."""
    y = np.asarray(lat, dtype=float)
    x = np.asarray(lon, dtype=float)
    inside, edge = _ring_test(x, y, boundary.outer)
    for hole in boundary.holes:
        in_hole, on_hole = _ring_test(x, y, hole)
        inside &= ~in_hole
        edge |= on_hole
    return inside | edge


def point_in_polygon(p, boundary):
    return bool(points_in_polygon(np.array([p.lat]), np.array([p.lon]), boundary)[0])


@dataclass
class Locations:
    """Sampled coordinates plus the grid cell each one was jittered from."""

    lat: np.ndarray
    lon: np.ndarray
    cell: np.ndarray

    def __len__(self):
        return len(self.lat)

    def __getitem__(self, i):
        return GeoPoint(float(self.lat[i]), float(self.lon[i]))

    def points(self):
        return [GeoPoint(float(a), float(b)) for a, b in zip(self.lat, self.lon)]


def cells_in_boundary(grid, boundary):
    """Indices of grid cells with positive density whose centre is inside the region."""
    inside = points_in_polygon(grid.lat, grid.lon, boundary)
    return np.flatnonzero(inside & (grid.density > 0))


def sample_locations(grid, boundary, n, rng, noise_half_width=None,
                     max_attempts_per_point=DEFAULT_MAX_ATTEMPTS):
    """Draw ``n`` density-weighted, jittered points inside ``boundary``.

    ``noise_half_width`` is in degrees; None means half of each cell's size.
    A rejected point redraws its cell.  After ``max_attempts_per_point``
    rejections for the same point a :class:`SamplingError` is raised.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    cand = cells_in_boundary(grid, boundary)
    if cand.size == 0:
        raise InfeasibleError("no positive-density grid cell has its centre inside the boundary")
    p = grid.density[cand] / grid.density[cand].sum()
    if noise_half_width is None:
        half = grid.cell_size[cand] / 2.0
    else:
        if noise_half_width < 0:
            raise ValidationError("noise_half_width must be >= 0")
        half = np.full(cand.size, float(noise_half_width))

    lat = np.empty(n)
    lon = np.empty(n)
    cell = np.empty(n, dtype=np.int64)
    attempts = np.zeros(n, dtype=np.int64)
    pending = np.arange(n)
    while pending.size:
        k = rng.choice(cand.size, size=pending.size, p=p)
        h = half[k]
        la = grid.lat[cand[k]] + rng.uniform(-1.0, 1.0, size=k.size) * h
        lo = grid.lon[cand[k]] + rng.uniform(-1.0, 1.0, size=k.size) * h
        ok = points_in_polygon(la, lo, boundary)
        done = pending[ok]
        lat[done], lon[done], cell[done] = la[ok], lo[ok], cand[k[ok]]
        attempts[pending] += 1
        failed = ~ok
        pending, last = pending[failed], cand[k[failed]]
        over = attempts[pending] >= max_attempts_per_point
        if np.any(over):
            c = int(last[np.argmax(over)])
            raise SamplingError(
                f"gave up after {max_attempts_per_point} rejected draws; last cell "
                f"{c} at ({grid.lat[c]:g}, {grid.lon[c]:g})")
    return Locations(lat, lon, cell)


def euclidean_degrees(lat1, lon1, lat2, lon2):
    return np.hypot(np.asarray(lat1) - lat2, np.asarray(lon1) - lon2)


def haversine_km(lat1, lon1, lat2, lon2):
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(np.asarray(lon2) - lon1)
    a = np.sin(dp / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


DISTANCES = {"euclidean": euclidean_degrees, "haversine": haversine_km}
