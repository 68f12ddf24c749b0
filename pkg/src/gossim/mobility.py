"""Node movement: leg-based random-waypoint walk and contact-trace replay."""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field

from .core import NodeId, NodeState

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AreaRect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate area rectangle")

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class MobilityParams:
    pause_max: float = 100.0  # ms
    leg_duration_min: float = 100.0  # ms
    leg_duration_max: float = 500.0  # ms
    speed_min: float = 0.8  # m/s
    speed_max: float = 2.0  # m/s

    def __post_init__(self):
        if self.pause_max < 0:
            raise ValueError("pause_max must be >= 0")
        if not 0 < self.leg_duration_min <= self.leg_duration_max:
            raise ValueError("leg duration range invalid")
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError("speed range invalid")


def _fold(u: float, lo: float, hi: float) -> float:
    """Reflect an unconstrained coordinate back into [lo, hi].

    Equivalent to integrating the straight leg tick by tick and
    mirroring the overshoot at each wall (billiard unfolding).
    """
    span = hi - lo
    y = (u - lo) % (2.0 * span)
    return lo + y if y <= span else lo + 2.0 * span - y


def bounce(
    position: tuple[float, float],
    direction: tuple[float, float],
    area: AreaRect,
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Specular reflection of a step that left the area.

    The velocity component normal to each crossed border is negated and
    the position overshoot mirrored back inside; a corner hit reflects
    on both axes.
    """
    x, y = position
    dx, dy = direction
    if x < area.x_min or x > area.x_max:
        x = _fold(x, area.x_min, area.x_max)
        dx = -dx
    if y < area.y_min or y > area.y_max:
        y = _fold(y, area.y_min, area.y_max)
        dy = -dy
    return (x, y), (dx, dy)


class NodeMotion:
    """Alternating leg / pause walk, evaluated lazily and analytically.

    Positions are exact for any query time inside the current segment,
    so the engine only evaluates nodes when they transmit or may
    receive.  Query times must be non-decreasing per node.
    """

    __slots__ = (
        "area", "params", "rng",
        "seg_start", "seg_end", "paused",
        "ox", "oy", "vx", "vy", "last_t",
    )

    def __init__(
        self,
        position: tuple[float, float],
        area: AreaRect,
        params: MobilityParams,
        rng: random.Random,
        start: float = 0.0,
    ):
        if not area.contains(*position):
            raise ValueError("initial position outside area")
        self.area = area
        self.params = params
        self.rng = rng
        self.ox, self.oy = position
        self.last_t = start
        self.seg_start = start
        self.seg_end = start
        self.paused = True
        self.vx = self.vy = 0.0
        self._next_segment(leg=True)

    def _next_segment(self, leg: bool) -> None:
        rng = self.rng
        p = self.params
        self.seg_start = self.seg_end
        if leg:
            angle = rng.uniform(0.0, TWO_PI)
            duration = rng.uniform(p.leg_duration_min, p.leg_duration_max)
            speed = rng.uniform(p.speed_min, p.speed_max)
            # speed is m/s, timestamps are ms
            self.vx = math.cos(angle) * speed / 1000.0
            self.vy = math.sin(angle) * speed / 1000.0
            self.paused = False
        else:
            duration = rng.uniform(0.0, p.pause_max)
            self.vx = self.vy = 0.0
            self.paused = True
        self.seg_end = self.seg_start + duration

    def _position_in_segment(self, t: float) -> tuple[float, float]:
        if self.paused:
            return self.ox, self.oy
        dt = t - self.seg_start
        a = self.area
        return (
            _fold(self.ox + self.vx * dt, a.x_min, a.x_max),
            _fold(self.oy + self.vy * dt, a.y_min, a.y_max),
        )

    def position_at(self, t: float) -> tuple[float, float]:
        if t < self.last_t:
            raise AssertionError("mobility queried backwards in time")
        self.last_t = t
        while t >= self.seg_end:
            self.ox, self.oy = self._position_in_segment(self.seg_end)
            self._next_segment(leg=self.paused)
        return self._position_in_segment(t)


def advance(state: NodeState, now: float) -> NodeState:
    """Move a node to its exact position at `now` (one-tick contract)."""
    state.position = state.motion.position_at(now)
    return state


@dataclass(frozen=True)
class ContactInterval:
    t_start: int
    t_end: int
    a: NodeId
    b: NodeId

    def __post_init__(self):
        if self.t_start < 0 or self.t_end <= self.t_start:
            raise ValueError(
                f"malformed contact interval [{self.t_start}, {self.t_end})"
            )
        if self.a == self.b:
            raise ValueError("contact interval needs two distinct nodes")


@dataclass
class ContactTrace:
    intervals: list[ContactInterval]
    _by_node: dict[NodeId, list[ContactInterval]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        self.intervals = sorted(
            self.intervals, key=lambda iv: (iv.t_start, iv.t_end, iv.a, iv.b)
        )
        for iv in self.intervals:
            self._by_node.setdefault(iv.a, []).append(iv)
            self._by_node.setdefault(iv.b, []).append(iv)

    @property
    def node_count(self) -> int:
        return 1 + max(max(iv.a, iv.b) for iv in self.intervals)

    def partners(self, node: NodeId, t: float) -> list[NodeId]:
        """Nodes in contact with `node` at time t (half-open intervals)."""
        out = {
            iv.b if iv.a == node else iv.a
            for iv in self._by_node.get(node, ())
            if iv.t_start <= t < iv.t_end
        }
        return sorted(out)


def contacts_at(trace: ContactTrace, t: float) -> set[tuple[NodeId, NodeId]]:
    """All unordered pairs in contact at time t."""
    return {
        (min(iv.a, iv.b), max(iv.a, iv.b))
        for iv in trace.intervals
        if iv.t_start <= t < iv.t_end
    }


TRACE_HEADER = ["t_start_ms", "t_end_ms", "node_a", "node_b"]


def load_trace(path) -> ContactTrace:
    """Read a contact trace CSV: t_start_ms,t_end_ms,node_a,node_b."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ValueError(f"bad trace header {header!r}, want {TRACE_HEADER}")
        intervals = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields")
            try:
                t0, t1, a, b = (int(v) for v in row)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if a < 0 or b < 0:
                raise ValueError(f"{path}:{lineno}: negative node id")
            try:
                intervals.append(ContactInterval(t0, t1, a, b))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not intervals:
        raise ValueError(f"{path}: empty contact trace")
    return ContactTrace(intervals)
