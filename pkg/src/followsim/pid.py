"""Discrete positional PID with clamping anti-windup.

The derivative acts on the measurement (not the error) and is low-pass
filtered, which avoids the kick a setpoint step would otherwise inject.
State is a value passed in and returned, so controller instances are just
(config, state) pairs and are trivially independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PidConfig:
    kp: float
    ki: float
    kd: float
    output_limit: float = 1.0
    integral_limit: float = 0.5
    derivative_filter_alpha: float = 1.0

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite gain {name}")
        if self.output_limit <= 0:
            raise ValueError("output_limit must be positive")
        if not 0 < self.integral_limit <= self.output_limit:
            raise ValueError("integral_limit must be in (0, output_limit]")
        if not 0 < self.derivative_filter_alpha <= 1:
            raise ValueError("derivative_filter_alpha must be in (0, 1]")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_measurement: float = 0.0
    filtered_derivative: float = 0.0


def pid_step(
    config: PidConfig,
    state: PidState,
    error: float,
    measurement: float,
    dt: float,
) -> tuple[float, PidState]:
    """One controller update; returns (effort, next state).

    effort = kp*error + ki*integral - kd*filtered_d(measurement), saturated to
    +-output_limit. The integral is clamped so its contribution stays within
    +-integral_limit; when ki == 0 no integration happens at all.
    """
    if not (math.isfinite(error) and math.isfinite(measurement) and math.isfinite(dt)):
        raise ValueError("non-finite controller input")
    if dt <= 0:
        raise ValueError("dt must be positive")

    integral = state.integral
    if config.ki != 0.0:
        integral += error * dt
        bound = config.integral_limit / abs(config.ki)
        integral = min(max(integral, -bound), bound)

    raw_d = (measurement - state.prev_measurement) / dt
    alpha = config.derivative_filter_alpha
    filtered_d = alpha * raw_d + (1.0 - alpha) * state.filtered_derivative

    effort = config.kp * error + config.ki * integral - config.kd * filtered_d
    effort = min(max(effort, -config.output_limit), config.output_limit)
    return effort, PidState(integral, measurement, filtered_d)


# float operations (+ - * / and min/max comparisons) in one pid_step call;
# the basis for the per-loop resource metric
PID_STEP_OPS = 16


def count_pid_ops(config: PidConfig) -> int:
    """Float operations per pid_step, the cost analogue of controller code size."""
    return PID_STEP_OPS
