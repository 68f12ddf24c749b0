"""Probabilistic 1-hop broadcast model with a spatial-hash accelerator."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .core import NodeId


@dataclass(frozen=True)
class RadioParams:
    r: float
    R: float
    p_min: float

    def __post_init__(self):
        if not 0 < self.r < self.R:
            raise ValueError("radio ranges must satisfy 0 < r < R")
        if not 0 < self.p_min <= 1:
            raise ValueError("p_min must be in (0, 1]")


def delivery_probability(d: float, p: RadioParams) -> float:
    """Probability that a transmission is received at distance d.

    1 inside the uniform radius, 0 beyond the maximum radius, and a
    smooth drop from 1 to p_min in between.  Both boundaries use the
    middle branch, which is continuous with the outer ones.
    """
    if d < 0:
        raise AssertionError("distance cannot be negative")
    if d < p.r:
        return 1.0
    if d > p.R:
        return 0.0
    x = (p.R - d) / (p.R - p.r)
    return p.p_min - math.sqrt(x) * (x - 5.0) * (1.0 - p.p_min) / 4.0


def sample_receivers(
    sender: NodeId,
    positions: dict[NodeId, tuple[float, float]],
    p: RadioParams,
    rng: random.Random,
) -> set[NodeId]:
    """Independently sample which other nodes hear one transmission.

    A receiver with probability exactly 1 is included without drawing,
    and one with probability 0 is skipped without drawing; this keeps
    the rng consumption identical to the grid-accelerated sampler.
    """
    sx, sy = positions[sender]
    received = set()
    for node in sorted(positions):
        if node == sender:
            continue
        x, y = positions[node]
        prob = delivery_probability(math.hypot(x - sx, y - sy), p)
        if prob >= 1.0 or (prob > 0.0 and rng.random() < prob):
            received.add(node)
    return received


class SpatialGrid:
    """Uniform hash grid over node positions.

    Cell size must be at least the query radius so a 3x3 cell
    neighbourhood is guaranteed to contain every candidate; the grid is
    an accelerator only and can never produce false negatives.
    """

    __slots__ = ("cell", "cells")

    def __init__(self, cell_size: float):
        self.cell = cell_size
        self.cells: dict[tuple[int, int], list[NodeId]] = {}

    def rebuild(self, positions):
        """positions: iterable of (node, x, y)."""
        cells: dict[tuple[int, int], list[NodeId]] = {}
        cell = self.cell
        for node, x, y in positions:
            key = (int(x // cell), int(y // cell))
            bucket = cells.get(key)
            if bucket is None:
                cells[key] = [node]
            else:
                bucket.append(node)
        self.cells = cells

    def candidates(self, x: float, y: float) -> list[NodeId]:
        cell = self.cell
        cx, cy = int(x // cell), int(y // cell)
        cells = self.cells
        out: list[NodeId] = []
        for i in (cx - 1, cx, cx + 1):
            for j in (cy - 1, cy, cy + 1):
                bucket = cells.get((i, j))
                if bucket:
                    out.extend(bucket)
        return out
