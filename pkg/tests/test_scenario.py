import math

import pytest

from followsim import (
    ScenarioError,
    area_at_range,
    default_scenario,
    load_scenario,
    parse_scenario_text,
)
from followsim.scenario import DEFAULT_FOLLOW_RANGE


class TestDefaults:
    def test_default_scenario_is_valid_equilibrium(self, base_scenario):
        cfg = base_scenario
        assert cfg.setpoint_area == pytest.approx(
            area_at_range(cfg.camera, cfg.panel, DEFAULT_FOLLOW_RANGE)
        )
        assert cfg.follow_range == pytest.approx(DEFAULT_FOLLOW_RANGE)
        # follower parked exactly at the setpoint range behind the leader
        assert cfg.follower_start.x == pytest.approx(-DEFAULT_FOLLOW_RANGE)
        assert cfg.follower_start.y == 0.0

    def test_dt_must_match_frame_interval(self):
        with pytest.raises(ScenarioError, match="frame"):
            default_scenario("x", dt=0.01)

    def test_runaway_guard(self):
        with pytest.raises(ScenarioError, match="guard"):
            default_scenario("x", duration=1e7)

    def test_duration_floor(self):
        with pytest.raises(ScenarioError):
            default_scenario("x", duration=0.0)

    def test_filter_resolution(self, base_scenario):
        assert base_scenario.filter_alpha_for("steering", "pid") is None
        assert base_scenario.filter_alpha_for("steering", "fuzzy") == 0.3
        explicit = default_scenario("x", steering_filter=0.5, throttle_filter=None)
        assert explicit.filter_alpha_for("steering", "pid") == 0.5
        assert explicit.filter_alpha_for("throttle", "fuzzy") is None


class TestParser:
    def test_empty_text_gives_defaults(self):
        cfg = parse_scenario_text("", default_name="fallback")
        assert cfg.name == "fallback"
        assert cfg.steering_kind == "pid"
        assert cfg.controllers == ("pid", "fuzzy")

    def test_comments_and_blank_lines_ignored(self):
        cfg = parse_scenario_text("# comment\n\nname = demo\n")
        assert cfg.name == "demo"

    def test_unknown_key_rejected_with_line(self):
        with pytest.raises(ScenarioError, match=r"line 2.*pid\.steering\.kpp"):
            parse_scenario_text("name = x\npid.steering.kpp = 1\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ScenarioError, match="duplicate"):
            parse_scenario_text("dt = 0.02\ndt = 0.02\n")

    def test_bad_number_rejected_with_line(self):
        with pytest.raises(ScenarioError, match="line 1"):
            parse_scenario_text("dt = fast\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ScenarioError, match="key = value"):
            parse_scenario_text("just some words\n")

    def test_pid_gain_override(self):
        cfg = parse_scenario_text("pid.steering.kp = 0.5\n")
        assert cfg.steering_pid.kp == 0.5
        # untouched fields keep defaults
        assert cfg.throttle_pid.kp != 0.5

    def test_camera_and_setpoint_coupling(self):
        cfg = parse_scenario_text(
            "camera.horizontal_fov_deg = 60\ncamera.frame_rate = 25\ndt = 0.04\n"
        )
        assert cfg.camera.horizontal_fov == pytest.approx(math.radians(60))
        assert cfg.dt == 0.04
        assert cfg.setpoint_area == pytest.approx(
            area_at_range(cfg.camera, cfg.panel, DEFAULT_FOLLOW_RANGE)
        )

    def test_explicit_setpoint_moves_default_follower(self):
        cfg = parse_scenario_text("setpoint_area = 300\n")
        assert cfg.follow_range == pytest.approx(
            math.sqrt(area_at_range(cfg.camera, cfg.panel, 1.0) / 300.0)
        )
        assert cfg.follower_start.x == pytest.approx(-cfg.follow_range)

    def test_leader_script_round_trip(self):
        cfg = parse_scenario_text(
            "leader.kind = waypoint_path\n"
            "leader.speed = 0:1.0, 5:0.5\n"
            "leader.waypoints = 3 0; 6 2\n"
        )
        assert cfg.leader.kind == "waypoint_path"
        assert cfg.leader.speed_profile == ((0.0, 1.0), (5.0, 0.5))
        assert cfg.leader.waypoints == ((3.0, 0.0), (6.0, 2.0))

    def test_fuzzy_universe_override(self):
        cfg = parse_scenario_text("fuzzy.steering.error_universe = 80\n")
        assert cfg.steering_fuzzy.error_universe == (-80.0, 80.0)

    def test_fuzzy_set_override(self):
        cfg = parse_scenario_text("fuzzy.steering.set.error.Z = -50, 0, 50\n")
        assert cfg.steering_fuzzy.error_sets["Z"].breakpoints == (-50.0, 0.0, 50.0)

    def test_fuzzy_rule_override(self):
        cfg = parse_scenario_text("fuzzy.throttle.rule.Z.Z = PS\n")
        assert cfg.throttle_fuzzy.rules[("Z", "Z")] == "PS"

    def test_fuzzy_output_scale(self):
        base = parse_scenario_text("")
        scaled = parse_scenario_text("fuzzy.steering.output_scale = 2.0\n")
        assert scaled.steering_fuzzy.output_universe == tuple(
            2.0 * u for u in base.steering_fuzzy.output_universe
        )

    def test_fuzzy_unknown_label_rejected(self):
        with pytest.raises(ScenarioError, match="label"):
            parse_scenario_text("fuzzy.steering.set.error.HUGE = 0, 1, 2\n")

    def test_fuzzy_bad_rule_cell_rejected(self):
        with pytest.raises(ScenarioError, match="rule"):
            parse_scenario_text("fuzzy.steering.rule.NL.WAT = Z\n")

    def test_fuzzy_coverage_break_rejected(self):
        # pulling NS's foot back and narrowing Z opens a hole near -35 px
        with pytest.raises(ScenarioError, match="uncovered"):
            parse_scenario_text(
                "fuzzy.steering.set.error.NS = -160, -80, -40\n"
                "fuzzy.steering.set.error.Z = -30, 0, 30\n"
            )

    def test_controllers_subset(self):
        cfg = parse_scenario_text("controllers = pid\n")
        assert cfg.controllers == ("pid",)
        with pytest.raises(ScenarioError):
            parse_scenario_text("controllers = pid, neural\n")

    def test_filter_settings(self):
        cfg = parse_scenario_text("filter.steering.alpha = none\nfilter.throttle.alpha = 0.25\n")
        assert cfg.steering_filter is None
        assert cfg.throttle_filter == 0.25

    def test_jitter_and_seed(self):
        cfg = parse_scenario_text("camera.jitter_px = 1.5\nseed = 42\n")
        assert cfg.camera.jitter_px == 1.5
        assert cfg.seed == 42


class TestLoadScenario:
    def test_load_names_from_stem(self, tmp_path):
        path = tmp_path / "myrun.scn"
        path.write_text("duration = 1\n")
        cfg = load_scenario(path)
        assert cfg.name == "myrun"
        assert cfg.duration == 1.0

    def test_explicit_name_wins(self, tmp_path):
        path = tmp_path / "file.scn"
        path.write_text("name = custom\n")
        assert load_scenario(path).name == "custom"

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(ScenarioError, match="cannot read"):
            load_scenario(tmp_path / "absent.scn")

    def test_error_carries_file_context(self, tmp_path):
        path = tmp_path / "broken.scn"
        path.write_text("bogus.key = 1\n")
        with pytest.raises(ScenarioError, match="broken.scn"):
            load_scenario(path)

    def test_shipped_examples_parse(self):
        for name in (
            "lateral_offset_moving",
            "lateral_offset_stationary",
            "throttle_step",
            "s_curve",
        ):
            cfg = load_scenario(f"scenarios/{name}.scn")
            assert cfg.name == name
