"""Exhaustive grid-search tuning of one control channel.

The grid file is the same key=value format as scenarios: `kp = 0.5, 1, 2`
lines for a PID channel or a single `output_scale = ...` line for a fuzzy
channel (the one structural knob exposed: scaling the output universe).
Every candidate runs the scenario once; candidates are ranked by the chosen
objective with ties broken by lower steering/throttle total variation, then
by gain order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .fuzzy import scale_output
from .metrics import objective_value, trace_metrics
from .scenario import ScenarioConfig
from .simulate import Trace, execute_archetype

OBJECTIVES = ("itae", "ise", "rms")
PID_GRID_KEYS = ("kp", "ki", "kd")
FUZZY_GRID_KEYS = ("output_scale",)
CHANNEL_SIGNALS = {"steering": "pixel_error_x", "throttle": "area_error"}


class TuneError(ValueError):
    pass


@dataclass(frozen=True)
class TuneSpec:
    channel: str
    objective: str
    grid: dict[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        if self.channel not in CHANNEL_SIGNALS:
            raise TuneError(f"unknown channel {self.channel!r}")
        if self.objective not in OBJECTIVES:
            raise TuneError(f"unknown objective {self.objective!r}")
        if not self.grid:
            raise TuneError("empty tuning grid")
        keys = tuple(sorted(self.grid))
        if not (set(keys) <= set(PID_GRID_KEYS) or set(keys) <= set(FUZZY_GRID_KEYS)):
            raise TuneError(
                f"grid keys {keys} must be kp/ki/kd (pid) or output_scale (fuzzy)"
            )
        for key, values in self.grid.items():
            if not values:
                raise TuneError(f"grid for {key!r} is empty")
            if any(not math.isfinite(v) for v in values):
                raise TuneError(f"grid for {key!r} has non-finite values")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise TuneError(f"grid for {key!r} must be strictly ascending")

    @property
    def mode(self) -> str:
        return "pid" if set(self.grid) <= set(PID_GRID_KEYS) else "fuzzy"

    @property
    def ordered_keys(self) -> tuple[str, ...]:
        base = PID_GRID_KEYS if self.mode == "pid" else FUZZY_GRID_KEYS
        return tuple(k for k in base if k in self.grid)


def load_gain_grid(path) -> dict[str, tuple[float, ...]]:
    grid: dict[str, tuple[float, ...]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise TuneError(f"line {lineno}: expected 'gain = v1, v2, ...'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in PID_GRID_KEYS + FUZZY_GRID_KEYS:
            raise TuneError(f"line {lineno}: unknown grid key {key!r}")
        if key in grid:
            raise TuneError(f"line {lineno}: duplicate grid key {key!r}")
        try:
            values = tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError:
            raise TuneError(f"line {lineno}: cannot parse values for {key!r}") from None
        if not values:
            raise TuneError(f"line {lineno}: no values for {key!r}")
        grid[key] = values
    if not grid:
        raise TuneError("grid file defines no gains")
    return grid


@dataclass(frozen=True)
class TuneResult:
    index: int  # evaluation order; candidate trace files are numbered with it
    params: dict[str, float]
    score: float
    control_effort_tv: float
    trace: Trace


def _candidate_config(base: ScenarioConfig, spec: TuneSpec, params: dict[str, float]) -> ScenarioConfig:
    kind = base.steering_kind if spec.channel == "steering" else base.throttle_kind
    if spec.mode == "pid":
        if kind != "pid":
            raise TuneError(
                f"grid tunes pid gains but the {spec.channel} channel is {kind!r}"
            )
        attr = "steering_pid" if spec.channel == "steering" else "throttle_pid"
        return replace(base, **{attr: replace(getattr(base, attr), **params)})
    if kind != "fuzzy":
        raise TuneError(
            f"grid tunes the fuzzy output scale but the {spec.channel} channel is {kind!r}"
        )
    attr = "steering_fuzzy" if spec.channel == "steering" else "throttle_fuzzy"
    return replace(base, **{attr: scale_output(getattr(base, attr), params["output_scale"])})


def run_grid_search(base: ScenarioConfig, spec: TuneSpec) -> list[TuneResult]:
    """Evaluate every grid point; returns results ranked best-first."""
    signal = CHANNEL_SIGNALS[spec.channel]
    keys = spec.ordered_keys
    results = []
    for index, combo in enumerate(itertools.product(*(spec.grid[k] for k in keys))):
        params = dict(zip(keys, combo))
        config = _candidate_config(base, spec, params)
        traces = execute_archetype(config)
        if len(traces) != 1:
            raise TuneError("tuning needs a single-run scenario archetype")
        trace = traces[0]
        score = objective_value(trace, signal, spec.objective)
        tv = trace_metrics(trace, signal).control_effort_tv
        results.append(TuneResult(index, params, score, tv, trace))
    results.sort(
        key=lambda r: (r.score, r.control_effort_tv, tuple(r.params[k] for k in keys))
    )
    return results


def candidate_filename(result: TuneResult) -> str:
    return f"cand_{result.index:03d}.csv"


def results_csv(spec: TuneSpec, results: list[TuneResult]) -> str:
    keys = spec.ordered_keys
    lines = [",".join(("rank",) + keys + (spec.objective, "control_effort_tv", "trace_file"))]
    for rank, r in enumerate(results, start=1):
        cells = [str(rank)]
        cells += [format(r.params[k], ".9g") for k in keys]
        cells += [format(r.score, ".9g"), format(r.control_effort_tv, ".9g")]
        cells.append(candidate_filename(r))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
