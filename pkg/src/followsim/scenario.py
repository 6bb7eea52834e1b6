"""Scenario definitions: defaults, validation, and the flat key=value file format.

A scenario file is plain text, one `dotted.key = value` per line, `#` comment
lines, and every key optional: unset keys fall back to the documented
defaults, unknown keys are an error so typos cannot silently change an
experiment. See README for the full key table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .fuzzy import (
    DEFAULT_LABELS,
    FuzzyConfig,
    FuzzyError,
    MembershipFunction,
    default_fuzzy_config,
    scale_output,
)
from .pid import PidConfig
from .sensor import CameraIntrinsics, TargetPanel, area_at_range, range_for_area
from .world import LeaderScript, VehicleParams, VehicleState

ARCHETYPES = ("scenario", "step_response", "lateral_offset", "path_follow")
CONTROLLER_KINDS = ("pid", "fuzzy")
LOST_TARGET_POLICIES = ("hold", "stop")
CHANNELS = ("steering", "throttle")

# head-on range the default setpoint area corresponds to
DEFAULT_FOLLOW_RANGE = 1.5
# default half-span of the steering error-rate universe, px/s
DEFAULT_STEERING_DELTA_SPAN = 600.0

DEFAULT_STEERING_PID = PidConfig(
    kp=0.015, ki=0.002, kd=0.0015,
    output_limit=1.0, integral_limit=0.2, derivative_filter_alpha=0.4,
)
DEFAULT_THROTTLE_PID = PidConfig(
    kp=0.0012, ki=0.0003, kd=0.0005,
    output_limit=1.0, integral_limit=0.1, derivative_filter_alpha=0.4,
)
DEFAULT_FUZZY_FILTER_ALPHA = 0.3


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    leader: LeaderScript
    follower_start: VehicleState
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    camera: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    panel: TargetPanel = field(default_factory=TargetPanel)
    archetype: str = "scenario"
    dt: float = 0.02
    duration: float = 20.0
    seed: int = 0
    setpoint_area: float = 0.0  # 0 means "derive from camera/panel", see default_scenario
    steady_state_px: float = 5.0
    controllers: tuple[str, ...] = ("pid", "fuzzy")
    steering_kind: str = "pid"
    throttle_kind: str = "pid"
    steering_locked: bool = False
    steering_pid: PidConfig = DEFAULT_STEERING_PID
    throttle_pid: PidConfig = DEFAULT_THROTTLE_PID
    steering_fuzzy: FuzzyConfig | None = None
    throttle_fuzzy: FuzzyConfig | None = None
    steering_filter: float | str | None = "auto"
    throttle_filter: float | str | None = "auto"
    lost_target_policy: str = "hold"
    stop_speed_eps: float = 0.01
    stop_hold_time: float = 1.0
    lateral_offset: float = 1.0
    lateral_leader_speed: float = 1.0
    step_separations: tuple[float, ...] = (1.0, 2.0, 4.0)

    def __post_init__(self) -> None:
        if not self.name:
            raise ScenarioError("scenario name must not be empty")
        if self.archetype not in ARCHETYPES:
            raise ScenarioError(f"unknown archetype {self.archetype!r}")
        if self.dt <= 0:
            raise ScenarioError("dt must be positive")
        if self.duration < self.dt:
            raise ScenarioError("duration must be at least one dt")
        if self.duration / self.dt > 1e7:
            raise ScenarioError("duration/dt exceeds the 1e7 runaway guard")
        if abs(self.dt * self.camera.frame_rate - 1.0) > 1e-9:
            raise ScenarioError(
                "dt must equal one camera frame interval "
                f"(1/{self.camera.frame_rate:g} s): control runs at frame rate"
            )
        if self.setpoint_area <= 0:
            raise ScenarioError("setpoint_area must be positive")
        if self.steady_state_px <= 0:
            raise ScenarioError("steady_state_px must be positive")
        if not self.controllers or any(c not in CONTROLLER_KINDS for c in self.controllers):
            raise ScenarioError("controllers must name pid and/or fuzzy")
        for kind in (self.steering_kind, self.throttle_kind):
            if kind not in CONTROLLER_KINDS:
                raise ScenarioError(f"unknown controller kind {kind!r}")
        if self.lost_target_policy not in LOST_TARGET_POLICIES:
            raise ScenarioError(f"unknown lost-target policy {self.lost_target_policy!r}")
        if self.stop_speed_eps < 0:
            raise ScenarioError("stop.speed_eps must be non-negative")
        if self.stop_hold_time <= 0:
            raise ScenarioError("stop.hold_time must be positive")
        for setting, key in ((self.steering_filter, "steering"), (self.throttle_filter, "throttle")):
            if setting is None or setting == "auto":
                continue
            if isinstance(setting, str) or not 0 < setting <= 1:
                raise ScenarioError(f"filter.{key}.alpha must be auto, none, or in (0, 1]")
        if any(s <= 0 or not math.isfinite(s) for s in self.step_separations):
            raise ScenarioError("step.separations must be positive")
        if self.steering_fuzzy is None or self.throttle_fuzzy is None:
            raise ScenarioError("fuzzy configs missing; build scenarios via default_scenario/load_scenario")

    def filter_alpha_for(self, channel: str, kind: str) -> float | None:
        """Resolve a channel's filter setting for the controller kind in use."""
        setting = self.steering_filter if channel == "steering" else self.throttle_filter
        if setting == "auto":
            return DEFAULT_FUZZY_FILTER_ALPHA if kind == "fuzzy" else None
        return setting

    @property
    def follow_range(self) -> float:
        """Head-on range at which the box area equals the setpoint."""
        return range_for_area(self.camera, self.panel, self.setpoint_area)


def default_scenario(name: str = "default", **overrides) -> ScenarioConfig:
    """Fully-populated scenario: stationary leader at the origin, follower
    parked at the setpoint range directly behind it."""
    camera = overrides.pop("camera", CameraIntrinsics())
    panel = overrides.pop("panel", TargetPanel())
    setpoint_area = overrides.pop(
        "setpoint_area", area_at_range(camera, panel, DEFAULT_FOLLOW_RANGE)
    )
    leader = overrides.pop(
        "leader", LeaderScript(kind="stationary", start=VehicleState(0.0, 0.0, 0.0))
    )
    if "follower_start" in overrides:
        follower_start = overrides.pop("follower_start")
    else:
        gap = range_for_area(camera, panel, setpoint_area)
        h = leader.start.heading
        follower_start = VehicleState(
            leader.start.x - gap * math.cos(h),
            leader.start.y - gap * math.sin(h),
            h,
            0.0,
        )
    steering_fuzzy = overrides.pop(
        "steering_fuzzy",
        default_fuzzy_config(camera.image_width / 2.0, DEFAULT_STEERING_DELTA_SPAN),
    )
    throttle_fuzzy = overrides.pop(
        "throttle_fuzzy", default_fuzzy_config(setpoint_area, 2.0 * setpoint_area)
    )
    return ScenarioConfig(
        name=name,
        leader=leader,
        follower_start=follower_start,
        camera=camera,
        panel=panel,
        setpoint_area=setpoint_area,
        steering_fuzzy=steering_fuzzy,
        throttle_fuzzy=throttle_fuzzy,
        **overrides,
    )


# ---------------------------------------------------------------------------
# scenario file parsing


def _parse_float(raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ScenarioError(f"expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ScenarioError(f"expected a finite number, got {raw!r}")
    return v


def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {raw!r}") from None


def _parse_bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ScenarioError(f"expected true/false, got {raw!r}")


def _parse_float_list(raw: str) -> tuple[float, ...]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ScenarioError("expected a comma-separated number list")
    return tuple(_parse_float(item) for item in items)


def _parse_speed_profile(raw: str):
    if ":" not in raw:
        return _parse_float(raw)
    pairs = []
    for item in raw.split(","):
        t_str, _, v_str = item.partition(":")
        pairs.append((_parse_float(t_str.strip()), _parse_float(v_str.strip())))
    return tuple(pairs)


def _parse_waypoints(raw: str) -> tuple[tuple[float, float], ...]:
    points = []
    for chunk in raw.split(";"):
        parts = chunk.split()
        if len(parts) != 2:
            raise ScenarioError(f"waypoint {chunk.strip()!r} is not 'x y'")
        points.append((_parse_float(parts[0]), _parse_float(parts[1])))
    return tuple(points)


def _parse_filter(raw: str):
    lowered = raw.lower()
    if lowered == "auto":
        return "auto"
    if lowered in ("none", "off"):
        return None
    return _parse_float(raw)


_SIMPLE_KEYS = {
    "name": str,
    "archetype": str,
    "seed": _parse_int,
    "dt": _parse_float,
    "duration": _parse_float,
    "setpoint_area": _parse_float,
    "steady_state_px": _parse_float,
    "controllers": lambda raw: tuple(s.strip() for s in raw.split(",") if s.strip()),
    "lost_target.policy": str,
    "stop.speed_eps": _parse_float,
    "stop.hold_time": _parse_float,
    "lateral.offset": _parse_float,
    "lateral.leader_speed": _parse_float,
    "step.separations": _parse_float_list,
    "leader.kind": str,
    "leader.start.x": _parse_float,
    "leader.start.y": _parse_float,
    "leader.start.heading": _parse_float,
    "leader.speed": _parse_speed_profile,
    "leader.waypoints": _parse_waypoints,
    "follower.start.x": _parse_float,
    "follower.start.y": _parse_float,
    "follower.start.heading": _parse_float,
    "follower.start.speed": _parse_float,
    "vehicle.wheelbase": _parse_float,
    "vehicle.max_steer_angle": _parse_float,
    "vehicle.max_speed": _parse_float,
    "vehicle.max_accel": _parse_float,
    "camera.image_width": _parse_int,
    "camera.image_height": _parse_int,
    "camera.horizontal_fov_deg": _parse_float,
    "camera.frame_rate": _parse_float,
    "camera.min_range": _parse_float,
    "camera.max_range": _parse_float,
    "camera.jitter_px": _parse_float,
    "panel.width": _parse_float,
    "panel.height": _parse_float,
    "panel.rear_offset": _parse_float,
    "controller.steering.kind": str,
    "controller.throttle.kind": str,
    "controller.steering.locked": _parse_bool,
    "filter.steering.alpha": _parse_filter,
    "filter.throttle.alpha": _parse_filter,
}

_PID_FIELDS = ("kp", "ki", "kd", "output_limit", "integral_limit", "derivative_filter_alpha")
for _ch in CHANNELS:
    for _f in _PID_FIELDS:
        _SIMPLE_KEYS[f"pid.{_ch}.{_f}"] = _parse_float
    for _f in ("error_universe", "delta_universe", "output_universe", "output_scale"):
        _SIMPLE_KEYS[f"fuzzy.{_ch}.{_f}"] = _parse_float
    _SIMPLE_KEYS[f"fuzzy.{_ch}.grid_points"] = _parse_int

_FUZZY_VARS = ("error", "delta", "output")


def _classify_key(key: str):
    """Return a parser for the key, or raise for unknown keys."""
    if key in _SIMPLE_KEYS:
        return _SIMPLE_KEYS[key]
    parts = key.split(".")
    if len(parts) == 5 and parts[0] == "fuzzy" and parts[2] == "set":
        if parts[1] in CHANNELS and parts[3] in _FUZZY_VARS:
            return _parse_float_list
    if len(parts) == 5 and parts[0] == "fuzzy" and parts[2] == "rule":
        if parts[1] in CHANNELS:
            return str
    raise ScenarioError(f"unknown key {key!r}")


def _read_pairs(text: str) -> dict[str, tuple[object, int]]:
    pairs: dict[str, tuple[object, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key in pairs:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
        parser = _classify_key_at(key, lineno)
        try:
            value = parser(raw)
        except ScenarioError as exc:
            raise ScenarioError(f"line {lineno}: {key}: {exc}") from None
        pairs[key] = (value, lineno)
    return pairs


def _classify_key_at(key: str, lineno: int):
    try:
        return _classify_key(key)
    except ScenarioError as exc:
        raise ScenarioError(f"line {lineno}: {exc}") from None


class _Pairs:
    """Typed view over the parsed key/value pairs with take-and-track semantics."""

    def __init__(self, pairs: dict[str, tuple[object, int]]):
        self._pairs = pairs

    def take(self, key: str, default=None):
        if key in self._pairs:
            return self._pairs.pop(key)[0]
        return default

    def has(self, key: str) -> bool:
        return key in self._pairs

    def take_prefixed(self, prefix: str) -> dict[str, object]:
        found = {k: v for k, (v, _) in list(self._pairs.items()) if k.startswith(prefix)}
        for k in found:
            del self._pairs[k]
        return found

    def remaining(self) -> list[str]:
        return sorted(self._pairs)


def _build_fuzzy(pairs: _Pairs, channel: str, error_span: float, delta_span: float) -> FuzzyConfig:
    cfg = default_fuzzy_config(
        pairs.take(f"fuzzy.{channel}.error_universe", error_span),
        pairs.take(f"fuzzy.{channel}.delta_universe", delta_span),
        pairs.take(f"fuzzy.{channel}.output_universe", 1.0),
        pairs.take(f"fuzzy.{channel}.grid_points", 1001),
    )
    set_maps = {"error": dict(cfg.error_sets), "delta": dict(cfg.delta_sets),
                "output": dict(cfg.output_sets)}
    for key, breakpoints in pairs.take_prefixed(f"fuzzy.{channel}.set.").items():
        _, _, _, var, label = key.split(".")
        if label not in set_maps[var]:
            raise ScenarioError(f"{key}: unknown set label {label!r}")
        try:
            set_maps[var][label] = MembershipFunction(breakpoints)
        except FuzzyError as exc:
            raise ScenarioError(f"{key}: {exc}") from None
    rules = dict(cfg.rules)
    for key, out_label in pairs.take_prefixed(f"fuzzy.{channel}.rule.").items():
        _, _, _, e_label, d_label = key.split(".")
        if (e_label, d_label) not in rules:
            raise ScenarioError(f"{key}: no rule cell ({e_label}, {d_label})")
        rules[(e_label, d_label)] = out_label
    try:
        cfg = replace(
            cfg,
            error_sets=set_maps["error"],
            delta_sets=set_maps["delta"],
            output_sets=set_maps["output"],
            rules=rules,
        )
        scale = pairs.take(f"fuzzy.{channel}.output_scale", 1.0)
        if scale != 1.0:
            cfg = scale_output(cfg, scale)
    except FuzzyError as exc:
        raise ScenarioError(f"fuzzy.{channel}: {exc}") from None
    return cfg


def parse_scenario_text(text: str, default_name: str = "scenario") -> ScenarioConfig:
    pairs = _Pairs(_read_pairs(text))
    try:
        camera = CameraIntrinsics(
            image_width=pairs.take("camera.image_width", 320),
            image_height=pairs.take("camera.image_height", 200),
            horizontal_fov=math.radians(pairs.take("camera.horizontal_fov_deg", 75.0)),
            frame_rate=pairs.take("camera.frame_rate", 50.0),
            min_range=pairs.take("camera.min_range", 0.3),
            max_range=pairs.take("camera.max_range", 20.0),
            jitter_px=pairs.take("camera.jitter_px", 0.0),
        )
        panel = TargetPanel(
            width=pairs.take("panel.width", 0.2159),
            height=pairs.take("panel.height", 0.2794),
            rear_offset=pairs.take("panel.rear_offset", 0.0),
        )
        vehicle = VehicleParams(
            wheelbase=pairs.take("vehicle.wheelbase", 0.33),
            max_steer_angle=pairs.take("vehicle.max_steer_angle", 0.45),
            max_speed=pairs.take("vehicle.max_speed", 4.0),
            max_accel=pairs.take("vehicle.max_accel", 2.0),
        )
        setpoint_area = pairs.take(
            "setpoint_area", area_at_range(camera, panel, DEFAULT_FOLLOW_RANGE)
        )

        leader_start = VehicleState(
            pairs.take("leader.start.x", 0.0),
            pairs.take("leader.start.y", 0.0),
            pairs.take("leader.start.heading", 0.0),
        )
        leader = LeaderScript(
            kind=pairs.take("leader.kind", "stationary"),
            start=leader_start,
            speed_profile=pairs.take("leader.speed", 0.0),
            waypoints=pairs.take("leader.waypoints"),
        )

        if pairs.has("follower.start.x") or pairs.has("follower.start.y"):
            follower_start = VehicleState(
                pairs.take("follower.start.x", 0.0),
                pairs.take("follower.start.y", 0.0),
                pairs.take("follower.start.heading", 0.0),
                pairs.take("follower.start.speed", 0.0),
            )
        else:
            gap = range_for_area(camera, panel, setpoint_area)
            h = pairs.take("follower.start.heading", leader_start.heading)
            follower_start = VehicleState(
                leader_start.x - gap * math.cos(leader_start.heading),
                leader_start.y - gap * math.sin(leader_start.heading),
                h,
                pairs.take("follower.start.speed", 0.0),
            )

        pid_configs = {}
        for channel, default in (
            ("steering", DEFAULT_STEERING_PID),
            ("throttle", DEFAULT_THROTTLE_PID),
        ):
            pid_configs[channel] = PidConfig(
                **{
                    f: pairs.take(f"pid.{channel}.{f}", getattr(default, f))
                    for f in _PID_FIELDS
                }
            )

        steering_fuzzy = _build_fuzzy(
            pairs, "steering", camera.image_width / 2.0, DEFAULT_STEERING_DELTA_SPAN
        )
        throttle_fuzzy = _build_fuzzy(pairs, "throttle", setpoint_area, 2.0 * setpoint_area)

        config = ScenarioConfig(
            name=pairs.take("name", default_name),
            archetype=pairs.take("archetype", "scenario"),
            dt=pairs.take("dt", 1.0 / camera.frame_rate),
            duration=pairs.take("duration", 20.0),
            seed=pairs.take("seed", 0),
            setpoint_area=setpoint_area,
            steady_state_px=pairs.take("steady_state_px", 5.0),
            controllers=pairs.take("controllers", ("pid", "fuzzy")),
            leader=leader,
            follower_start=follower_start,
            vehicle=vehicle,
            camera=camera,
            panel=panel,
            steering_kind=pairs.take("controller.steering.kind", "pid"),
            throttle_kind=pairs.take("controller.throttle.kind", "pid"),
            steering_locked=pairs.take("controller.steering.locked", False),
            steering_pid=pid_configs["steering"],
            throttle_pid=pid_configs["throttle"],
            steering_fuzzy=steering_fuzzy,
            throttle_fuzzy=throttle_fuzzy,
            steering_filter=pairs.take("filter.steering.alpha", "auto"),
            throttle_filter=pairs.take("filter.throttle.alpha", "auto"),
            lost_target_policy=pairs.take("lost_target.policy", "hold"),
            stop_speed_eps=pairs.take("stop.speed_eps", 0.01),
            stop_hold_time=pairs.take("stop.hold_time", 1.0),
            lateral_offset=pairs.take("lateral.offset", 1.0),
            lateral_leader_speed=pairs.take("lateral.leader_speed", 1.0),
            step_separations=pairs.take("step.separations", (1.0, 2.0, 4.0)),
        )
    except ScenarioError:
        raise
    except FuzzyError as exc:
        raise ScenarioError(f"fuzzy config: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    leftovers = pairs.remaining()
    if leftovers:
        raise ScenarioError(f"unused keys: {', '.join(leftovers)}")
    return config


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        return parse_scenario_text(text, default_name=path.stem)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
