"""Run outputs and the two result families: convergence speed and load.

Also evaluates the closed-form per-node load bounds and the classic
gossip reliability value exp(-exp(-c)).
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .core import NodeId, VersionNumber


@dataclass
class RunRecord:
    """Immutable-after-run result of one simulation."""

    n_nodes: int
    duration_ms: int
    seed: int
    protocol: str
    tokens: Optional[int]
    workload_fingerprint: str  # identifies everything except the protocol
    injected_version: VersionNumber
    update_events: list[tuple[int, NodeId, VersionNumber]] = field(default_factory=list)
    software_sends: dict[NodeId, dict[VersionNumber, int]] = field(default_factory=dict)
    beacon_sends: dict[NodeId, int] = field(default_factory=dict)
    beacon_receptions: int = 0
    beacon_tx_count: int = 0  # beacon transmissions, for the mean below
    beacon_rx_sum: int = 0  # total sampled receivers over those transmissions
    metadata: dict[str, str] = field(default_factory=dict)
    action_log: Optional[list[tuple]] = None

    def total_software_sends(self) -> int:
        return sum(sum(per.values()) for per in self.software_sends.values())

    def node_software_sends(self, node: NodeId) -> int:
        return sum(self.software_sends.get(node, {}).values())

    def measured_nnh(self) -> float:
        """Mean receiver-set size over all beacon transmissions."""
        if self.beacon_tx_count == 0:
            return 0.0
        return self.beacon_rx_sum / self.beacon_tx_count


def convergence_series(
    rec: RunRecord, version: VersionNumber
) -> list[tuple[int, int]]:
    """Step series: how many nodes hold >= version at each update instant."""
    if version != rec.injected_version and not any(
        v >= version for _, _, v in rec.update_events
    ):
        raise ValueError(f"version {version} never appeared in this run")
    series = [(0, 0)]
    holders: set[NodeId] = set()
    for t, node, v in rec.update_events:
        if v >= version and node not in holders:
            holders.add(node)
            if series[-1][0] == t:
                series[-1] = (t, len(holders))
            else:
                series.append((t, len(holders)))
    if series[-1][0] != rec.duration_ms:
        series.append((rec.duration_ms, len(holders)))
    return series


def load_histogram(rec: RunRecord) -> dict[int, int]:
    """sends-per-node histogram: {k: number of nodes that sent k copies}."""
    counts = Counter(rec.node_software_sends(n) for n in range(rec.n_nodes))
    return dict(counts)


def time_to_fraction(
    series: list[tuple[int, int]], fraction: float, n_nodes: int
) -> Optional[int]:
    """First instant at which count >= fraction * n_nodes, if ever."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    threshold = fraction * n_nodes
    for t, count in series:
        if count >= threshold:
            return t
    return None


@dataclass(frozen=True)
class TheoreticalParams:
    n_v: int  # number of upgrades over the run
    t: int  # tokens per node
    n_nh: float  # average neighbourhood size
    d: float  # run duration, ms
    p_b: float  # beacon period, ms
    n_s: int  # network size

    def __post_init__(self):
        if min(self.n_v, self.t, self.n_s) < 0 or self.t == 0 or self.n_s == 0:
            raise ValueError("counts must be positive (n_v may be 0)")
        if self.n_nh < 0 or self.d <= 0 or self.p_b <= 0:
            raise ValueError("n_nh, d, p_b must be positive")


def bound_flooding(p: TheoreticalParams) -> float:
    """Per-node software sends under flooding: one per received beacon."""
    return p.d / p.p_b * p.n_nh


def bound_fcp(p: TheoreticalParams) -> float:
    """Tokens are also drained for the factory version, hence n_v + 1."""
    return (p.n_v + 1) * p.t


def bound_pbp(p: TheoreticalParams) -> float:
    return p.n_v * (p.n_s - 1)


def bound_gcp(p: TheoreticalParams) -> float:
    return p.n_v * p.t


def gossip_reliability(c: float) -> float:
    return math.exp(-math.exp(-c))


def savings(alg: RunRecord, flooding: RunRecord) -> float:
    """Percentage of software sends avoided relative to the flooding run."""
    if alg.workload_fingerprint != flooding.workload_fingerprint:
        raise ValueError("runs come from different workloads")
    base = flooding.total_software_sends()
    if base == 0:
        raise ValueError("flooding baseline sent nothing")
    return 100.0 * (1.0 - alg.total_software_sends() / base)


def write_convergence(path, series: list[tuple[int, int]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t_ms", "count"])
        w.writerows(series)


def write_load(path, histogram: dict[int, int]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sends", "node_count"])
        for sends in sorted(histogram):
            w.writerow([sends, histogram[sends]])


SUMMARY_FIELDS = [
    "scenario",
    "protocol",
    "tokens",
    "seed",
    "n_nodes",
    "total_software_sends",
    "total_beacon_sends",
    "final_count",
    "t90_ms",
    "savings_pct",
    "measured_nnh",
    "bound_fp",
    "bound_fcp",
    "bound_pbp",
    "bound_gcp",
]


def summary_row(
    rec: RunRecord,
    scenario_name: str,
    baseline: Optional[RunRecord] = None,
) -> dict[str, object]:
    series = convergence_series(rec, rec.injected_version)
    t90 = time_to_fraction(series, 0.9, rec.n_nodes)
    tokens = rec.tokens if rec.tokens is not None else ""
    params = TheoreticalParams(
        n_v=1,
        t=rec.tokens or 1,
        n_nh=rec.measured_nnh(),
        d=rec.duration_ms,
        p_b=float(rec.metadata.get("beacon_period_ms", 100)),
        n_s=rec.n_nodes,
    )
    return {
        "scenario": scenario_name,
        "protocol": rec.protocol,
        "tokens": tokens,
        "seed": rec.seed,
        "n_nodes": rec.n_nodes,
        "total_software_sends": rec.total_software_sends(),
        "total_beacon_sends": sum(rec.beacon_sends.values()),
        "final_count": series[-1][1],
        "t90_ms": t90 if t90 is not None else "",
        "savings_pct": f"{savings(rec, baseline):.4f}" if baseline else "",
        "measured_nnh": f"{rec.measured_nnh():.6f}",
        "bound_fp": f"{bound_flooding(params):.4f}",
        "bound_fcp": f"{bound_fcp(params):.4f}",
        "bound_pbp": f"{bound_pbp(params):.4f}",
        "bound_gcp": f"{bound_gcp(params):.4f}",
    }


def write_summary(path, rows: list[dict[str, object]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        w.writerows(rows)
