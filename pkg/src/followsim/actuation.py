"""Servo-style command plumbing shared by both controller families.

Controller efforts are normalized to roughly +-1 and mapped onto the hobby
servo scale: 0..180 with 90 neutral. Above 90 steers right / drives forward,
below 90 steers left; throttle below neutral just coasts to a stop because
the vehicles never reverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .fuzzy import FuzzyConfig, count_fuzzy_ops, fuzzy_step
from .pid import PidConfig, PidState, count_pid_ops, pid_step
from .world import VehicleParams

NEUTRAL_PWM = 90.0
PWM_MAX = 180.0
DEFAULT_CHANNEL_GAIN = 90.0  # pwm per unit effort: effort +-1 spans the full scale

# op-model costs of the non-controller arithmetic in one channel update
_PWM_MAP_OPS = 2
_EXP_FILTER_OPS = 4
_DELTA_OPS = 2


@dataclass(frozen=True)
class ExpFilter:
    """First-order low-pass: out = alpha*in + (1-alpha)*previous out."""

    alpha: float
    state: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")


def exp_filter_step(filt: ExpFilter, value: float) -> tuple[float, ExpFilter]:
    out = filt.alpha * value + (1.0 - filt.alpha) * filt.state
    return out, ExpFilter(filt.alpha, out)


@dataclass(frozen=True)
class ControlCommand:
    steering_pwm: float = NEUTRAL_PWM
    throttle_pwm: float = NEUTRAL_PWM

    def __post_init__(self) -> None:
        for name in ("steering_pwm", "throttle_pwm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= PWM_MAX):
                raise ValueError(f"{name} must be within [0, {PWM_MAX:g}]")


def effort_to_pwm(effort: float, channel_gain: float = DEFAULT_CHANNEL_GAIN) -> float:
    """Map effort to a servo command about 90 neutral, clamped to [0, 180]."""
    if channel_gain <= 0:
        raise ValueError("channel_gain must be positive")
    return min(max(NEUTRAL_PWM + channel_gain * effort, 0.0), PWM_MAX)


def pwm_to_actuation(command: ControlCommand, params: VehicleParams) -> tuple[float, float]:
    """Servo command -> (steer angle, speed command). Below-neutral throttle coasts."""
    steer = params.max_steer_angle * (command.steering_pwm - NEUTRAL_PWM) / NEUTRAL_PWM
    speed = params.max_speed * max(0.0, command.throttle_pwm - NEUTRAL_PWM) / NEUTRAL_PWM
    return steer, speed


class ChannelController:
    """One control channel: a PID or fuzzy core plus optional output filter.

    The fuzzy error rate and the PID derivative both need a previous sample;
    the first update seeds it from the current one so neither controller
    kicks on startup.
    """

    def __init__(
        self,
        kind: str,
        pid_config: PidConfig | None = None,
        fuzzy_config: FuzzyConfig | None = None,
        filter_alpha: float | None = None,
        channel_gain: float = DEFAULT_CHANNEL_GAIN,
    ) -> None:
        if kind not in ("pid", "fuzzy"):
            raise ValueError(f"unknown controller kind {kind!r}")
        if kind == "pid" and pid_config is None:
            raise ValueError("pid channel needs a PidConfig")
        if kind == "fuzzy" and fuzzy_config is None:
            raise ValueError("fuzzy channel needs a FuzzyConfig")
        self.kind = kind
        self.pid_config = pid_config
        self.fuzzy_config = fuzzy_config
        self.filter_alpha = filter_alpha
        self.channel_gain = channel_gain
        self.reset()

    def reset(self) -> None:
        self.pid_state = PidState()
        self.filter = None if self.filter_alpha is None else ExpFilter(self.filter_alpha)
        self._prev_error: float | None = None
        self._started = False

    def update(self, error: float, measurement: float, dt: float) -> float:
        """One control update; returns the channel's PWM command."""
        if self.kind == "pid":
            if not self._started:
                self.pid_state = PidState(prev_measurement=measurement)
            effort, self.pid_state = pid_step(
                self.pid_config, self.pid_state, error, measurement, dt
            )
        else:
            prev = error if self._prev_error is None else self._prev_error
            effort = fuzzy_step(self.fuzzy_config, error, (error - prev) / dt)
            self._prev_error = error
        self._started = True
        if self.filter is not None:
            effort, self.filter = exp_filter_step(self.filter, effort)
        return effort_to_pwm(effort, self.channel_gain)

    @property
    def ops_per_step(self) -> int:
        if self.kind == "pid":
            ops = count_pid_ops(self.pid_config)
        else:
            ops = count_fuzzy_ops(self.fuzzy_config) + _DELTA_OPS
        if self.filter_alpha is not None:
            ops += _EXP_FILTER_OPS
        return ops + _PWM_MAP_OPS
