"""Virtual color-tracking camera.

Replaces the physical Pixy: the geometric relation between the follower and
the colored panel on the leader's tail is converted into the same
bounding-box quantities the real camera streams (centroid pixels, box width,
height, and area). Projection is planar: only the horizontal axis carries
geometry; the vertical centroid is pinned to the image center and box height
comes from range alone.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .world import VehicleState, normalize_angle


@dataclass(frozen=True)
class CameraIntrinsics:
    image_width: int = 320
    image_height: int = 200
    horizontal_fov: float = math.radians(75.0)
    frame_rate: float = 50.0
    min_range: float = 0.3
    max_range: float = 20.0
    jitter_px: float = 0.0

    def __post_init__(self) -> None:
        if self.image_width <= 0 or self.image_width % 2 != 0:
            raise ValueError("image_width must be a positive even integer")
        if self.image_height <= 0:
            raise ValueError("image_height must be positive")
        if not 0.0 < self.horizontal_fov < math.pi:
            raise ValueError("horizontal_fov must be in (0, pi)")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        if not 0.0 < self.min_range < self.max_range:
            raise ValueError("need 0 < min_range < max_range")
        if self.jitter_px < 0:
            raise ValueError("jitter_px must be non-negative")
        if not math.isfinite(self.focal_px) or self.focal_px <= 0:
            raise ValueError("degenerate focal length")

    @property
    def focal_px(self) -> float:
        return (self.image_width / 2.0) / math.tan(self.horizontal_fov / 2.0)


@dataclass(frozen=True)
class TargetPanel:
    """Flat colored panel on the leader's rear, facing backward along -heading."""

    width: float = 0.2159   # 8.5 inch
    height: float = 0.2794  # 11 inch
    rear_offset: float = 0.0  # panel center distance behind the leader reference point

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("panel dimensions must be positive")
        if self.rear_offset < 0:
            raise ValueError("rear_offset must be non-negative")


@dataclass(frozen=True)
class SensorReading:
    """One bounding-box report: centroid pixels, box size, area, timestamp."""

    x_px: float
    y_px: float
    width_px: float
    height_px: float
    area_px2: float
    t: float

    def __post_init__(self) -> None:
        if self.area_px2 != self.width_px * self.height_px:
            raise ValueError("area_px2 must equal width_px * height_px")


def observe(
    camera: CameraIntrinsics,
    follower: VehicleState,
    leader: VehicleState,
    panel: TargetPanel,
    t: float,
    rng: random.Random | None = None,
) -> SensorReading | None:
    """Project the leader's panel into the follower's camera.

    Returns None when there is nothing to detect: panel center outside the
    horizontal field of view, range outside [min_range, max_range], or the
    panel presenting (near) edge-on or its front face.
    """
    hx = math.cos(follower.heading)
    hy = math.sin(follower.heading)
    px = leader.x - panel.rear_offset * math.cos(leader.heading)
    py = leader.y - panel.rear_offset * math.sin(leader.heading)
    rel_x, rel_y = px - follower.x, py - follower.y

    rng_dist = math.hypot(rel_x, rel_y)
    if not camera.min_range <= rng_dist <= camera.max_range:
        return None

    forward = rel_x * hx + rel_y * hy
    left = -rel_x * hy + rel_y * hx
    if forward <= 0.0:
        return None
    bearing = math.atan2(left, forward)
    if abs(bearing) >= camera.horizontal_fov / 2.0:
        return None

    # foreshortening from the relative yaw between view axis and panel facing
    aspect = normalize_angle(follower.heading - leader.heading)
    facing = math.cos(aspect)
    if facing <= 1e-9:
        return None

    # image x grows toward positive bearing so that positive pixel error,
    # positive effort, PWM > 90, and positive steer angle all point the same way
    f_px = camera.focal_px
    half_w = camera.image_width / 2.0
    x_px = half_w + f_px * (left / forward)
    width_px = f_px * panel.width * facing / rng_dist
    height_px = f_px * panel.height / rng_dist

    if rng is not None and camera.jitter_px > 0.0:
        j = camera.jitter_px
        x_px += rng.uniform(-j, j)
        width_px += rng.uniform(-j, j)
        height_px += rng.uniform(-j, j)

    x_px = min(max(x_px, 0.0), float(camera.image_width))
    width_px = min(max(width_px, 0.0), float(camera.image_width))
    height_px = min(max(height_px, 0.0), float(camera.image_height))
    return SensorReading(
        x_px=x_px,
        y_px=camera.image_height / 2.0,
        width_px=width_px,
        height_px=height_px,
        area_px2=width_px * height_px,
        t=t,
    )


def pixel_error_x(reading: SensorReading, camera: CameraIntrinsics) -> float:
    """Horizontal centroid offset from frame center, signed toward the side
    that an above-neutral (PWM > 90) steering command turns into."""
    return reading.x_px - camera.image_width / 2.0


def area_error(reading: SensorReading, setpoint_area: float) -> float:
    """Signed area error; positive = target too small = too far = speed up."""
    if setpoint_area <= 0:
        raise ValueError("setpoint_area must be positive")
    return setpoint_area - reading.area_px2


def area_at_range(camera: CameraIntrinsics, panel: TargetPanel, distance: float) -> float:
    """Box area of a head-on panel at the given range (no clamping)."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    facing = 1.0
    width_px = camera.focal_px * panel.width * facing / distance
    height_px = camera.focal_px * panel.height / distance
    return width_px * height_px


def range_for_area(camera: CameraIntrinsics, panel: TargetPanel, area: float) -> float:
    """Head-on range that produces the given box area (inverse of area_at_range)."""
    if area <= 0:
        raise ValueError("area must be positive")
    return camera.focal_px * math.sqrt(panel.width * panel.height / area)
