import dataclasses

import pytest

from followsim import TraceRecord, default_scenario


@pytest.fixture
def base_scenario():
    return default_scenario("testbase")


def records_match_except_timing(a: TraceRecord, b: TraceRecord) -> bool:
    """Field-for-field equality excluding the wall-clock loop cost."""
    for f in dataclasses.fields(TraceRecord):
        if f.name == "loop_cost_us":
            continue
        if getattr(a, f.name) != getattr(b, f.name):
            return False
    return True


def make_record(t, **overrides) -> TraceRecord:
    """Synthetic record with every field defaulted; handy for metric tests."""
    values = dict(
        t=t,
        leader_x=0.0,
        leader_y=0.0,
        follower_x=0.0,
        follower_y=0.0,
        follower_heading=0.0,
        pixel_error_x=0.0,
        area_error=0.0,
        steering_pwm=90.0,
        throttle_pwm=90.0,
        lateral_dev_m=0.0,
        follow_dist_m=0.0,
        detected=True,
        loop_cost_us=1.0,
        op_count=10,
    )
    values.update(overrides)
    return TraceRecord(**values)
