"""Closed-loop scenario execution.

One record is logged per control period (the camera frame interval); vehicle
kinematics are integrated with sub-steps of at most 2 ms inside each period so
plant accuracy never depends on the controller cadence. Runs are deterministic
for a fixed seed except for the wall-clock loop_cost_us field.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, replace

from .actuation import ChannelController, ControlCommand, NEUTRAL_PWM, pwm_to_actuation
from .scenario import ScenarioConfig, ScenarioError
from .sensor import area_error, observe, pixel_error_x
from .world import (
    MAX_PHYSICS_DT,
    LeaderScript,
    VehicleState,
    following_distance,
    lateral_deviation,
    leader_pose,
    step_bicycle,
)

STOP_REASON_STATIONARY = "follower_stationary"


@dataclass(frozen=True)
class TraceRecord:
    """One control period of an experiment; field order matches the CSV schema."""

    t: float
    leader_x: float
    leader_y: float
    follower_x: float
    follower_y: float
    follower_heading: float
    pixel_error_x: float
    area_error: float
    steering_pwm: float
    throttle_pwm: float
    lateral_dev_m: float
    follow_dist_m: float
    detected: bool
    loop_cost_us: float
    op_count: int


@dataclass
class Trace:
    """Scenario name plus the time-ordered records; the config snapshot and any
    early-stop reason ride along but do not take part in equality (they do not
    survive the CSV round trip)."""

    name: str
    records: list[TraceRecord]
    config: ScenarioConfig | None = field(default=None, compare=False)
    stop_reason: str | None = field(default=None, compare=False)


def _make_channel(config: ScenarioConfig, channel: str) -> ChannelController:
    kind = config.steering_kind if channel == "steering" else config.throttle_kind
    return ChannelController(
        kind=kind,
        pid_config=config.steering_pid if channel == "steering" else config.throttle_pid,
        fuzzy_config=config.steering_fuzzy if channel == "steering" else config.throttle_fuzzy,
        filter_alpha=config.filter_alpha_for(channel, kind),
    )


def run_scenario(config: ScenarioConfig) -> Trace:
    """Sense -> control -> actuate -> integrate loop producing one Trace.

    The camera is sampled once per period; between detections the last command
    (or neutral, under the `stop` policy) is held and the record is flagged
    undetected. Runs against a stationary leader end early once the follower
    has been slower than stop_speed_eps for stop_hold_time seconds.
    """
    n_records = int(config.duration / config.dt + 1e-9)
    sub_steps = max(1, math.ceil(config.dt / MAX_PHYSICS_DT - 1e-12))
    sub_dt = config.dt / sub_steps
    rng = random.Random(config.seed)

    steering = None if config.steering_locked else _make_channel(config, "steering")
    throttle = _make_channel(config, "throttle")

    follower = config.follower_start
    command = ControlCommand()
    pe = 0.0
    ae = 0.0
    tracked = False
    # seed the track with the leader's lane extended backward from its start,
    # so lateral deviation is measured against a line from the first record on
    leader0 = leader_pose(config.leader, 0.0)
    back = 10.0 * max(config.follow_range, 1.0)
    track_points: list[tuple[float, float]] = [
        (leader0.x - back * math.cos(leader0.heading),
         leader0.y - back * math.sin(leader0.heading))
    ]
    records: list[TraceRecord] = []
    stop_reason = None
    still_time = 0.0

    for k in range(n_records):
        t = k * config.dt
        leader = leader_pose(config.leader, t)
        if not track_points or track_points[-1] != (leader.x, leader.y):
            track_points.append((leader.x, leader.y))

        started = time.perf_counter_ns()
        reading = observe(config.camera, follower, leader, config.panel, t, rng=rng)
        ops = 0
        if reading is not None:
            pe = pixel_error_x(reading, config.camera)
            ae = area_error(reading, config.setpoint_area)
            if steering is None:
                steering_pwm = NEUTRAL_PWM
            else:
                steering_pwm = steering.update(pe, pe, config.dt)
                ops += steering.ops_per_step
            throttle_pwm = throttle.update(ae, reading.area_px2, config.dt)
            ops += throttle.ops_per_step
            command = ControlCommand(steering_pwm, throttle_pwm)
            tracked = True
        else:
            if config.lost_target_policy == "stop":
                command = ControlCommand()
            tracked = False
        loop_cost_us = (time.perf_counter_ns() - started) / 1000.0

        records.append(
            TraceRecord(
                t=t,
                leader_x=leader.x,
                leader_y=leader.y,
                follower_x=follower.x,
                follower_y=follower.y,
                follower_heading=follower.heading,
                pixel_error_x=pe,
                area_error=ae,
                steering_pwm=command.steering_pwm,
                throttle_pwm=command.throttle_pwm,
                lateral_dev_m=lateral_deviation(follower, track_points),
                follow_dist_m=following_distance(follower, leader),
                detected=tracked,
                loop_cost_us=loop_cost_us,
                op_count=ops,
            )
        )

        steer_angle, speed_cmd = pwm_to_actuation(command, config.vehicle)
        for _ in range(sub_steps):
            follower = step_bicycle(follower, config.vehicle, steer_angle, speed_cmd, sub_dt)

        if config.leader.kind == "stationary":
            still_time = still_time + config.dt if follower.speed < config.stop_speed_eps else 0.0
            if still_time >= config.stop_hold_time and k + 1 < n_records:
                stop_reason = STOP_REASON_STATIONARY
                break

    return Trace(config.name, records, config=config, stop_reason=stop_reason)


def _behind(leader_start: VehicleState, gap: float, offset: float = 0.0) -> VehicleState:
    """Follower start pose `gap` behind the leader, `offset` to its left."""
    h = leader_start.heading
    return VehicleState(
        leader_start.x - gap * math.cos(h) - offset * math.sin(h),
        leader_start.y - gap * math.sin(h) + offset * math.cos(h),
        h,
        0.0,
    )


def _tag(value: float) -> str:
    return f"{value:g}".replace(".", "p").replace("-", "m")


def run_step_response(base: ScenarioConfig, initial_separations) -> list[Trace]:
    """Throttle step tests: follower parked at each separation behind a
    stationary leader, steering locked neutral, one trace per separation."""
    separations = tuple(float(s) for s in initial_separations)
    if not separations:
        raise ScenarioError("need at least one separation")
    for sep in separations:
        if sep <= base.camera.min_range:
            raise ScenarioError(f"separation {sep:g} m is inside min_range")
        if sep > base.camera.max_range:
            raise ScenarioError(f"separation {sep:g} m: target undetectable at start")
    leader = LeaderScript(kind="stationary", start=base.leader.start)
    traces = []
    for sep in separations:
        config = replace(
            base,
            name=f"{base.name}_sep_{_tag(sep)}m",
            archetype="scenario",
            leader=leader,
            follower_start=_behind(leader.start, sep),
            steering_locked=True,
        )
        traces.append(run_scenario(config))
    return traces


def run_lateral_offset(base: ScenarioConfig, offset: float, leader_speed: float) -> Trace:
    """Steering test: follower starts at the setpoint range behind the leader's
    track but laterally offset. leader_speed 0 reproduces the stop-before-
    aligned regime; a moving leader gives the follower room to converge."""
    if offset == 0.0 or not math.isfinite(offset):
        raise ScenarioError("lateral offset must be non-zero")
    if leader_speed < 0 or not math.isfinite(leader_speed):
        raise ScenarioError("leader_speed must be non-negative")
    if leader_speed == 0.0:
        leader = LeaderScript(kind="stationary", start=base.leader.start)
    else:
        leader = LeaderScript(
            kind="straight_line", start=base.leader.start, speed_profile=leader_speed
        )
    config = replace(
        base,
        name=f"{base.name}_lat_{_tag(offset)}m_v{_tag(leader_speed)}",
        archetype="scenario",
        leader=leader,
        follower_start=_behind(base.leader.start, base.follow_range, offset),
        steering_locked=False,
    )
    return run_scenario(config)


def run_path_follow(base: ScenarioConfig, path: LeaderScript) -> Trace:
    """Full two-channel loop along a straight or waypoint leader path."""
    if path.kind not in ("straight_line", "waypoint_path"):
        raise ScenarioError("path must be straight_line or waypoint_path")
    if path.kind == "waypoint_path":
        pts = path.path_points()
        heading = math.atan2(pts[1][1] - pts[0][1], pts[1][0] - pts[0][0])
        start = VehicleState(pts[0][0], pts[0][1], heading)
    else:
        start = path.start
    config = replace(
        base,
        name=f"{base.name}_path",
        archetype="scenario",
        leader=path,
        follower_start=_behind(start, base.follow_range),
        steering_locked=False,
    )
    return run_scenario(config)


def execute_archetype(config: ScenarioConfig) -> list[Trace]:
    """Run whichever experiment the scenario's archetype names; always a list."""
    if config.archetype == "step_response":
        return run_step_response(config, config.step_separations)
    if config.archetype == "lateral_offset":
        return [run_lateral_offset(config, config.lateral_offset, config.lateral_leader_speed)]
    if config.archetype == "path_follow":
        return [run_path_follow(config, config.leader)]
    return [run_scenario(config)]
