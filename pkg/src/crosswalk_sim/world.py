"""Scene description and simulated lidar occupancy grid.

The grid is expressed in a road-aligned frame anchored at the ego
position: axis x runs along the road heading, axis y to the left of it.
Grid cells hold one of three states (free, occupied, unobservable);
unobservable means the straight sight line from the ego to the cell
center crosses an obstacle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .path import Path

FREE = 0
OCCUPIED = 1
UNOBSERVABLE = 2

GRID_LENGTH = 210  # cells ahead of the vehicle
GRID_WIDTH = 48  # cells across
CELLS_PER_M = 3
EGO_CELL = (0, 24)  # anchor cell of the ego vehicle
FORWARD_RANGE = GRID_LENGTH / CELLS_PER_M  # 70 m
LATERAL_RANGE = GRID_WIDTH / (2 * CELLS_PER_M)  # 8 m each side

COUNT_BIN_WIDTH = 180
NUM_COUNT_BINS = 10
MAX_CELL_COUNT = GRID_LENGTH * GRID_WIDTH


@dataclass(frozen=True)
class RoadFrame:
    """Straight road axis: origin and direction of travel in inertial
    coordinates. Road y is positive to the left of travel."""

    origin: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0

    def to_road(self, north, east):
        tn, te = math.cos(self.heading), math.sin(self.heading)
        dn = np.asarray(north, dtype=float) - self.origin[0]
        de = np.asarray(east, dtype=float) - self.origin[1]
        x = dn * tn + de * te
        y = dn * te - de * tn
        return x, y

    def to_inertial(self, x, y):
        tn, te = math.cos(self.heading), math.sin(self.heading)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        north = self.origin[0] + x * tn + y * te
        east = self.origin[1] + x * te - y * tn
        return north, east


@dataclass(frozen=True)
class RectObstacle:
    """Oriented rectangle in road coordinates: center, full extents and a
    yaw angle relative to the road axis."""

    center: tuple[float, float]
    size: tuple[float, float]
    yaw: float = 0.0

    def __post_init__(self):
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise ValueError("obstacle extents must be positive")

    def _to_local(self, x, y):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        return c * dx + s * dy, -s * dx + c * dy

    def contains(self, x, y):
        lx, ly = self._to_local(x, y)
        return (np.abs(lx) <= self.size[0] / 2) & (np.abs(ly) <= self.size[1] / 2)

    def distance(self, x: float, y: float) -> float:
        """Euclidean distance from a road-frame point to the rectangle."""
        lx, ly = self._to_local(x, y)
        dx = max(abs(float(lx)) - self.size[0] / 2, 0.0)
        dy = max(abs(float(ly)) - self.size[1] / 2, 0.0)
        return math.hypot(dx, dy)

    def min_road_x(self) -> float:
        """Smallest along-road coordinate of the rectangle's corners."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hx, hy = self.size[0] / 2, self.size[1] / 2
        return self.center[0] - abs(c) * hx - abs(s) * hy

    def blocks_segment(self, origin: tuple[float, float], x, y):
        """Vectorized slab test: does the segment from origin to each
        (x, y) point intersect this rectangle? Touching counts."""
        x0, y0 = self._to_local(origin[0], origin[1])
        x1, y1 = self._to_local(x, y)
        hx, hy = self.size[0] / 2, self.size[1] / 2
        t_lo = np.zeros_like(x1, dtype=float)
        t_hi = np.ones_like(x1, dtype=float)
        hit = np.ones_like(x1, dtype=bool)
        for q0, q1, h in ((x0, x1, hx), (y0, y1, hy)):
            d = q1 - q0
            parallel = d == 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                ta = (-h - q0) / d
                tb = (h - q0) / d
            lo = np.minimum(ta, tb)
            hi = np.maximum(ta, tb)
            hit &= ~(parallel & (abs(q0) > h))
            t_lo = np.where(parallel, t_lo, np.maximum(t_lo, lo))
            t_hi = np.where(parallel, t_hi, np.minimum(t_hi, hi))
        return hit & (t_lo <= t_hi)


@dataclass(frozen=True)
class Crosswalk:
    """Band across the road at a fixed along-road distance."""

    distance: float
    width: float = 3.0


@dataclass(frozen=True)
class Pedestrian:
    present: bool = False
    position: tuple[float, float] = (0.0, 0.0)  # road coordinates


@dataclass(frozen=True)
class Scene:
    road: RoadFrame = field(default_factory=RoadFrame)
    lateral_bounds: tuple[float, float] = (-1.8, 5.4)
    lane_width: float = 3.6
    obstacles: tuple[RectObstacle, ...] = ()
    crosswalk: Crosswalk = field(default_factory=lambda: Crosswalk(distance=40.0))
    pedestrian: Pedestrian = field(default_factory=Pedestrian)

    def __post_init__(self):
        if self.lateral_bounds[0] >= self.lateral_bounds[1]:
            raise ValueError("lateral_bounds must be ordered")
        if self.pedestrian.present:
            px = self.pedestrian.position[0]
            half = self.crosswalk.width / 2
            if abs(px - self.crosswalk.distance) > half:
                raise ValueError("pedestrian must stand inside the crosswalk band")


def _cell_centers(ego_xy: tuple[float, float]):
    xs = ego_xy[0] + (np.arange(GRID_LENGTH) + 0.5) / CELLS_PER_M
    ys = ego_xy[1] + (np.arange(GRID_WIDTH) - GRID_WIDTH / 2 + 0.5) / CELLS_PER_M
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return gx, gy


def build_grid(scene: Scene, pose: tuple[float, float, float]) -> np.ndarray:
    """Ternary occupancy grid for an ego pose (north, east, heading).

    The grid covers 70 m ahead of the ego position along the road axis and
    8 m to each side, one cell per 1/3 m. Returns a (210, 48) uint8 array
    of FREE / OCCUPIED / UNOBSERVABLE.
    """
    ex, ey = scene.road.to_road(pose[0], pose[1])
    ego_xy = (float(ex), float(ey))
    gx, gy = _cell_centers(ego_xy)
    occupied = np.zeros(gx.shape, dtype=bool)
    blocked = np.zeros(gx.shape, dtype=bool)
    for obstacle in scene.obstacles:
        occupied |= obstacle.contains(gx, gy)
        blocked |= obstacle.blocks_segment(ego_xy, gx, gy)
    grid = np.zeros(gx.shape, dtype=np.uint8)
    grid[blocked] = UNOBSERVABLE
    grid[occupied] = OCCUPIED
    return grid


def count_unobservable(grid: np.ndarray) -> int:
    return int(np.count_nonzero(grid == UNOBSERVABLE))


def bin_observation(count: int) -> int:
    """Map an unobservable-cell count to one of 10 bins of width 180.

    Bins are half-open; every count of 1800 or more lands in the top bin.
    """
    count = int(count)
    if count < 0 or count > MAX_CELL_COUNT:
        raise ValueError("count outside the grid cell range")
    return min(count // COUNT_BIN_WIDTH, NUM_COUNT_BINS - 1)


def pedestrian_visible(scene: Scene, pose: tuple[float, float, float]) -> bool:
    """True when a present pedestrian inside the 70 m forward window has a
    clear sight line from the ego position."""
    if not scene.pedestrian.present:
        return False
    ex, ey = scene.road.to_road(pose[0], pose[1])
    px, py = scene.pedestrian.position
    ahead = px - float(ex)
    if ahead < 0.0 or ahead > FORWARD_RANGE:
        return False
    target_x = np.asarray([px])
    target_y = np.asarray([py])
    for obstacle in scene.obstacles:
        if bool(obstacle.blocks_segment((float(ex), float(ey)), target_x, target_y)[0]):
            return False
    return True


def grid_to_text(grid: np.ndarray) -> str:
    """Digit raster of a grid, one row per longitudinal cell index."""
    return "\n".join("".join(str(int(v)) for v in row) for row in grid)


def crosswalk_occlusion_band(
    scene: Scene, path: Path, sample_step: float = 0.5
) -> tuple[float, float] | None:
    """Range of path distances from which part of the crosswalk is hidden.

    Yields (s_lo, s_hi) over the path samples where at least one point of
    the crosswalk line has its sight line cut by an obstacle, or None when
    the crosswalk is visible from everywhere. Only path points before the
    crosswalk are considered.
    """
    if not scene.obstacles:
        return None
    y_lo, y_hi = scene.lateral_bounds
    n_samples = max(int(round((y_hi - y_lo) / sample_step)) + 1, 2)
    cw_y = np.linspace(y_lo, y_hi, n_samples)
    cw_x = np.full_like(cw_y, scene.crosswalk.distance)
    px, py = scene.road.to_road(path.north, path.east)
    shadowed = []
    for k in range(len(px)):
        if px[k] >= scene.crosswalk.distance:
            continue
        origin = (float(px[k]), float(py[k]))
        hit = np.zeros(cw_y.shape, dtype=bool)
        for obstacle in scene.obstacles:
            hit |= obstacle.blocks_segment(origin, cw_x, cw_y)
        if hit.any():
            shadowed.append(float(path.s[k]))
    if not shadowed:
        return None
    return min(shadowed), max(shadowed)


def crosswalk_path_distance(scene: Scene, path: Path) -> float:
    """Arc length at which the path crosses the crosswalk line."""
    px, _ = scene.road.to_road(path.north, path.east)
    target = scene.crosswalk.distance
    beyond = np.nonzero(px >= target)[0]
    if len(beyond) == 0:
        return path.length
    k = int(beyond[0])
    if k == 0:
        return 0.0
    frac = (target - px[k - 1]) / (px[k] - px[k - 1])
    return float(path.s[k - 1] + frac * (path.s[k] - path.s[k - 1]))


def load_scene(source) -> Scene:
    """Build a Scene from a YAML file path or an already-parsed mapping."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    road = data.get("road", {})
    frame = RoadFrame(
        origin=tuple(road.get("origin", (0.0, 0.0))),
        heading=float(road.get("heading", 0.0)),
    )
    obstacles = tuple(
        RectObstacle(
            center=tuple(item["center"]),
            size=tuple(item["size"]),
            yaw=float(item.get("yaw", 0.0)),
        )
        for item in data.get("obstacles", [])
    )
    cw = data.get("crosswalk", {})
    ped = data.get("pedestrian", {})
    return Scene(
        road=frame,
        lateral_bounds=tuple(road.get("bounds", (-1.8, 5.4))),
        lane_width=float(road.get("lane_width", 3.6)),
        obstacles=obstacles,
        crosswalk=Crosswalk(
            distance=float(cw.get("distance", 40.0)),
            width=float(cw.get("width", 3.0)),
        ),
        pedestrian=Pedestrian(
            present=bool(ped.get("present", False)),
            position=tuple(ped.get("position", (0.0, 0.0))),
        ),
    )
