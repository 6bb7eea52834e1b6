"""Two-input Mamdani fuzzy controller.

Pipeline: fuzzify (error, error rate) -> min/max rule inference -> centroid
defuzzification on a fixed uniform grid over the output universe. Everything
is built from triangular/trapezoidal sets; the default layout is the textbook
workhorse: five 50%-overlap triangles per variable and a 25-rule diagonal table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

DEFAULT_LABELS = ("NL", "NS", "Z", "PS", "PL")
MIN_GRID_POINTS = 201
# centroid discretization error is first order in grid spacing when a clipped
# set rides the universe edge; 1001 points keeps it a few 1e-4 of the span
DEFAULT_GRID_POINTS = 1001


class FuzzyError(ValueError):
    pass


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular (3 breakpoints) or trapezoidal (4) set over one universe."""

    breakpoints: tuple[float, ...]

    def __post_init__(self) -> None:
        pts = tuple(float(b) for b in self.breakpoints)
        if len(pts) not in (3, 4):
            raise FuzzyError("breakpoints must have 3 (triangle) or 4 (trapezoid) values")
        if any(not math.isfinite(b) for b in pts):
            raise FuzzyError("non-finite breakpoint")
        if any(b1 < b0 for b0, b1 in zip(pts, pts[1:])):
            raise FuzzyError("breakpoints must be non-decreasing")
        object.__setattr__(self, "breakpoints", pts)

    @property
    def shape(self) -> str:
        return "triangular" if len(self.breakpoints) == 3 else "trapezoidal"

    @classmethod
    def triangle(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls((a, b, c))

    @classmethod
    def trapezoid(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls((a, b, c, d))

    def membership(self, x: float) -> float:
        """Piecewise-linear grade in [0, 1]; zero-width edges act as steps."""
        if len(self.breakpoints) == 3:
            a, b, c = self.breakpoints
            lo, hi = b, b
        else:
            a, lo, hi, c = self.breakpoints
        if x < a or x > c:
            return 0.0
        if lo <= x <= hi:
            return 1.0
        if x < lo:
            return (x - a) / (lo - a)  # lo > a here, else x would be in the core
        return (c - x) / (c - hi)

    def on_grid(self, grid: np.ndarray) -> np.ndarray:
        return np.array([self.membership(float(x)) for x in grid])

    def scaled(self, k: float) -> "MembershipFunction":
        return MembershipFunction(tuple(k * b for b in self.breakpoints))


class Aggregate(NamedTuple):
    """Inference result: membership sampled on the output universe grid."""

    universe: np.ndarray
    membership: np.ndarray


def _check_coverage(
    name: str, sets: dict[str, MembershipFunction], universe: tuple[float, float]
) -> None:
    lo, hi = universe
    for x in np.linspace(lo, hi, 257):
        if not any(mf.membership(float(x)) > 0.0 for mf in sets.values()):
            raise FuzzyError(f"{name} sets leave {float(x):g} uncovered")


@dataclass(frozen=True)
class FuzzyConfig:
    error_sets: dict[str, MembershipFunction]
    delta_sets: dict[str, MembershipFunction]
    output_sets: dict[str, MembershipFunction]
    rules: dict[tuple[str, str], str]
    error_universe: tuple[float, float]
    delta_universe: tuple[float, float]
    output_universe: tuple[float, float]
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self) -> None:
        for name, universe in (
            ("error", self.error_universe),
            ("error_delta", self.delta_universe),
            ("output", self.output_universe),
        ):
            lo, hi = universe
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise FuzzyError(f"bad {name} universe {universe!r}")
        if self.grid_points < MIN_GRID_POINTS:
            raise FuzzyError(f"grid_points must be >= {MIN_GRID_POINTS}")
        if not self.error_sets or not self.delta_sets or not self.output_sets:
            raise FuzzyError("every variable needs at least one set")
        _check_coverage("error", self.error_sets, self.error_universe)
        _check_coverage("error_delta", self.delta_sets, self.delta_universe)
        _check_coverage("output", self.output_sets, self.output_universe)

        expected = {(e, d) for e in self.error_sets for d in self.delta_sets}
        if set(self.rules) != expected:
            missing = sorted(expected - set(self.rules))
            extra = sorted(set(self.rules) - expected)
            raise FuzzyError(f"rule table not total: missing {missing}, extra {extra}")
        for out in self.rules.values():
            if out not in self.output_sets:
                raise FuzzyError(f"rule output {out!r} is not an output set")

    @cached_property
    def output_grid(self) -> np.ndarray:
        lo, hi = self.output_universe
        return np.linspace(lo, hi, self.grid_points)

    @cached_property
    def _output_curves(self) -> dict[str, np.ndarray]:
        return {label: mf.on_grid(self.output_grid) for label, mf in self.output_sets.items()}


def fuzzify(
    value: float, sets: dict[str, MembershipFunction], universe: tuple[float, float]
) -> dict[str, float]:
    """Membership grade of value in every set; out-of-universe values clamp to the edge."""
    lo, hi = universe
    v = min(max(value, lo), hi)
    return {label: mf.membership(v) for label, mf in sets.items()}


def infer(
    config: FuzzyConfig,
    error_degrees: dict[str, float],
    delta_degrees: dict[str, float],
) -> Aggregate:
    """Min/max Mamdani inference: clip each fired rule's output set, max-aggregate."""
    grid = config.output_grid
    aggregate = np.zeros_like(grid)
    curves = config._output_curves
    for (e_label, d_label), out_label in config.rules.items():
        strength = min(error_degrees[e_label], delta_degrees[d_label])
        if strength > 0.0:
            np.maximum(aggregate, np.minimum(curves[out_label], strength), out=aggregate)
    return Aggregate(grid, aggregate)


def defuzz_centroid(aggregate: Aggregate) -> float:
    """Weighted-mean centroid of the gridded aggregate membership."""
    total = float(aggregate.membership.sum())
    if total == 0.0:
        raise FuzzyError("all-zero aggregate: rule coverage is incomplete for this input")
    return float(np.dot(aggregate.universe, aggregate.membership)) / total


def fuzzy_step(config: FuzzyConfig, error: float, error_delta: float) -> float:
    """Crisp controller output for one (error, error rate) sample."""
    e_deg = fuzzify(error, config.error_sets, config.error_universe)
    d_deg = fuzzify(error_delta, config.delta_sets, config.delta_universe)
    return defuzz_centroid(infer(config, e_deg, d_deg))


def scale_output(config: FuzzyConfig, k: float) -> FuzzyConfig:
    """Scale the output universe and every output set by k > 0 (tuning knob)."""
    if k <= 0:
        raise FuzzyError("scale factor must be positive")
    lo, hi = config.output_universe
    return replace(
        config,
        output_sets={label: mf.scaled(k) for label, mf in config.output_sets.items()},
        output_universe=(k * lo, k * hi),
    )


def _five_triangles(span: float) -> dict[str, MembershipFunction]:
    half = span / 2.0
    centers = (-span, -half, 0.0, half, span)
    return {
        label: MembershipFunction.triangle(c - half, c, c + half)
        for label, c in zip(DEFAULT_LABELS, centers)
    }


def default_rule_table() -> dict[tuple[str, str], str]:
    """Diagonal table: output index = clamp(error index + delta index - 2)."""
    rules = {}
    for i, e in enumerate(DEFAULT_LABELS):
        for j, d in enumerate(DEFAULT_LABELS):
            rules[(e, d)] = DEFAULT_LABELS[min(max(i + j - 2, 0), 4)]
    return rules


def default_fuzzy_config(
    error_span: float,
    delta_span: float,
    output_span: float = 1.0,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> FuzzyConfig:
    """Symmetric 5x5 controller over [-span, span] universes."""
    if min(error_span, delta_span, output_span) <= 0:
        raise FuzzyError("universe spans must be positive")
    return FuzzyConfig(
        error_sets=_five_triangles(error_span),
        delta_sets=_five_triangles(delta_span),
        output_sets=_five_triangles(output_span),
        rules=default_rule_table(),
        error_universe=(-error_span, error_span),
        delta_universe=(-delta_span, delta_span),
        output_universe=(-output_span, output_span),
        grid_points=grid_points,
    )


_TRI_EVAL_OPS = 7
_TRAP_EVAL_OPS = 9


def count_fuzzy_ops(config: FuzzyConfig) -> int:
    """Float operations per fuzzy_step under the same op model as count_pid_ops.

    Fuzzification grades every input set, each rule costs one min plus a
    grid-wide clip and max, and the centroid costs one multiply-accumulate
    pair per grid point plus the final divide.
    """
    ops = 0
    for mf in list(config.error_sets.values()) + list(config.delta_sets.values()):
        ops += _TRI_EVAL_OPS if mf.shape == "triangular" else _TRAP_EVAL_OPS
    ops += len(config.rules) * (1 + 2 * config.grid_points)
    ops += 3 * config.grid_points + 1
    return ops
