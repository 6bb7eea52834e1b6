"""Planar ground-truth kinematics for the leader and follower vehicles.

The follower is integrated with a no-slip bicycle model (fixed rear wheel,
steered front wheel): xdot = v*cos(h), ydot = v*sin(h), hdot = v*tan(delta)/L.
The leader is scripted, not controlled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

SCRIPT_KINDS = ("stationary", "straight_line", "waypoint_path")

# physics sub-step ceiling used by the experiment runner
MAX_PHYSICS_DT = 0.002


def normalize_angle(angle: float) -> float:
    """Wrap an angle to [-pi, pi). Angles already in range pass through unchanged."""
    a = math.remainder(angle, math.tau)
    return -math.pi if a == math.pi else a


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"non-finite {name}: {v!r}")


@dataclass(frozen=True)
class VehicleState:
    """Pose and speed of one vehicle. Heading is CCW radians from +x."""

    x: float
    y: float
    heading: float = 0.0
    speed: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 0.33
    max_steer_angle: float = 0.45
    max_speed: float = 4.0
    max_accel: float = 2.0

    def __post_init__(self) -> None:
        _require_finite(
            wheelbase=self.wheelbase,
            max_steer_angle=self.max_steer_angle,
            max_speed=self.max_speed,
            max_accel=self.max_accel,
        )
        if self.wheelbase <= 0:
            raise ValueError("wheelbase must be positive")
        if not 0 < self.max_steer_angle < math.pi / 2:
            raise ValueError("max_steer_angle must be in (0, pi/2)")
        if self.max_speed <= 0:
            raise ValueError("max_speed must be positive")
        if self.max_accel <= 0:
            raise ValueError("max_accel must be positive")


def _normalize_profile(profile) -> tuple[tuple[float, float], ...]:
    """Accept a plain speed or (time, speed) pairs; return sorted pairs from t=0."""
    if isinstance(profile, (int, float)):
        pairs = ((0.0, float(profile)),)
    else:
        pairs = tuple((float(t), float(v)) for t, v in profile)
    if not pairs:
        raise ValueError("speed profile must not be empty")
    if pairs[0][0] != 0.0:
        raise ValueError("speed profile must start at t=0")
    for (t0, v0), (t1, _) in zip(pairs, pairs[1:]):
        if t1 <= t0:
            raise ValueError("speed profile times must be strictly ascending")
    for t, v in pairs:
        _require_finite(time=t, speed=v)
        if v < 0:
            raise ValueError("speed profile values must be non-negative")
    return pairs


@dataclass(frozen=True)
class LeaderScript:
    """Scripted leader motion: parked, constant-heading line, or waypoint polyline."""

    kind: str
    start: VehicleState
    speed_profile: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    waypoints: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCRIPT_KINDS:
            raise ValueError(f"unknown leader script kind {self.kind!r}")
        object.__setattr__(self, "speed_profile", _normalize_profile(self.speed_profile))
        if self.kind == "waypoint_path":
            if self.waypoints is None or len(self.waypoints) < 2:
                raise ValueError("waypoint_path needs at least two waypoints")
            pts = tuple((float(x), float(y)) for x, y in self.waypoints)
            if all(p == pts[0] for p in pts):
                raise ValueError("waypoints must contain at least two distinct points")
            object.__setattr__(self, "waypoints", pts)

    def speed_at(self, t: float) -> float:
        v = self.speed_profile[0][1]
        for t0, v0 in self.speed_profile:
            if t0 <= t:
                v = v0
            else:
                break
        return v

    def distance_at(self, t: float) -> float:
        """Arc length traveled by time t under the piecewise-constant profile."""
        s = 0.0
        for i, (t0, v0) in enumerate(self.speed_profile):
            t1 = self.speed_profile[i + 1][0] if i + 1 < len(self.speed_profile) else t
            if t <= t0:
                break
            s += v0 * (min(t, t1) - t0)
        return s

    def path_points(self) -> tuple[tuple[float, float], ...]:
        """Polyline traversed by a waypoint_path script (start pose prepended)."""
        pts = [(self.start.x, self.start.y)]
        for p in self.waypoints or ():
            if p != pts[-1]:
                pts.append(p)
        return tuple(pts)


def step_bicycle(
    state: VehicleState,
    params: VehicleParams,
    steer_angle: float,
    speed_cmd: float,
    dt: float,
) -> VehicleState:
    """Advance one vehicle dt seconds under bicycle kinematics.

    The steering angle is clamped to +-max_steer_angle. Speed slews toward the
    (clamped, non-negative) command at max_accel, and the pose is integrated
    with RK4 using the exact slewed speed profile within the step.
    """
    _require_finite(
        x=state.x, y=state.y, heading=state.heading, speed=state.speed,
        steer_angle=steer_angle, speed_cmd=speed_cmd, dt=dt,
    )
    if dt <= 0:
        raise ValueError("dt must be positive")

    delta = min(max(steer_angle, -params.max_steer_angle), params.max_steer_angle)
    curvature = math.tan(delta) / params.wheelbase

    v0 = state.speed
    target = min(max(speed_cmd, 0.0), params.max_speed)
    dv = target - v0
    ramp_time = abs(dv) / params.max_accel

    def speed_at(tau: float) -> float:
        if tau >= ramp_time:
            return target
        return v0 + math.copysign(params.max_accel * tau, dv)

    def deriv(tau: float, h: float) -> tuple[float, float, float]:
        v = speed_at(tau)
        return v * math.cos(h), v * math.sin(h), v * curvature

    x, y, h = state.x, state.y, state.heading
    half = 0.5 * dt
    k1 = deriv(0.0, h)
    k2 = deriv(half, h + half * k1[2])
    k3 = deriv(half, h + half * k2[2])
    k4 = deriv(dt, h + dt * k3[2])
    sixth = dt / 6.0
    x += sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    y += sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    h += sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    return VehicleState(x, y, normalize_angle(h), speed_at(dt))


def leader_pose(script: LeaderScript, t: float) -> VehicleState:
    """Pose of the scripted leader at time t >= 0."""
    if not math.isfinite(t):
        raise ValueError(f"non-finite time: {t!r}")
    if t < 0:
        raise ValueError("time must be non-negative")

    if script.kind == "stationary":
        return replace(script.start, speed=0.0)

    if script.kind == "straight_line":
        s = script.distance_at(t)
        h = script.start.heading
        return VehicleState(
            script.start.x + s * math.cos(h),
            script.start.y + s * math.sin(h),
            h,
            script.speed_at(t),
        )

    # waypoint_path: walk segments at the profile speed, hold the end pose
    pts = script.path_points()
    s = script.distance_at(t)
    for p, q in zip(pts, pts[1:]):
        seg = math.hypot(q[0] - p[0], q[1] - p[1])
        heading = math.atan2(q[1] - p[1], q[0] - p[0])
        if s <= seg:
            u = s / seg
            return VehicleState(
                p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1]),
                heading, script.speed_at(t),
            )
        s -= seg
    return VehicleState(pts[-1][0], pts[-1][1], heading, 0.0)


def _as_point(p) -> tuple[float, float]:
    if hasattr(p, "x"):
        return (p.x, p.y)
    return (float(p[0]), float(p[1]))


def lateral_deviation(follower: VehicleState, leader_track) -> float:
    """Signed perpendicular distance from the follower to the leader's polyline.

    Positive when the follower sits left of the local track direction. A track
    with a single distinct point (or a follower collinear with the nearest
    segment's axis) has no left/right side; the unsigned distance is returned.
    """
    pts: list[tuple[float, float]] = []
    for p in leader_track:
        xy = _as_point(p)
        if not pts or xy != pts[-1]:
            pts.append(xy)
    if not pts:
        raise ValueError("leader track must not be empty")

    fx, fy = follower.x, follower.y
    if len(pts) == 1:
        return math.hypot(fx - pts[0][0], fy - pts[0][1])

    best_d2 = math.inf
    best_sign = 0.0
    for (px, py), (qx, qy) in zip(pts, pts[1:]):
        vx, vy = qx - px, qy - py
        norm2 = vx * vx + vy * vy
        if norm2 == 0.0:  # distinct points can still be closer than sqrt(tiny)
            continue
        u = ((fx - px) * vx + (fy - py) * vy) / norm2
        u = min(max(u, 0.0), 1.0)
        cx, cy = px + u * vx, py + u * vy
        d2 = (fx - cx) ** 2 + (fy - cy) ** 2
        if d2 < best_d2:
            best_d2 = d2
            cross = vx * (fy - cy) - vy * (fx - cx)
            best_sign = math.copysign(1.0, cross) if cross != 0.0 else 0.0
    if math.isinf(best_d2):  # every segment collapsed numerically
        return math.hypot(fx - pts[0][0], fy - pts[0][1])
    d = math.sqrt(best_d2)
    return best_sign * d if best_sign != 0.0 else d


def following_distance(follower: VehicleState, leader: VehicleState) -> float:
    """Euclidean distance between the two vehicle positions."""
    _require_finite(fx=follower.x, fy=follower.y, lx=leader.x, ly=leader.y)
    return math.hypot(leader.x - follower.x, leader.y - follower.y)
