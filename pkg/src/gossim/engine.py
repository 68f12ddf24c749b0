"""Deterministic discrete-event loop driving one simulation run.

Same (scenario, seed) means byte-identical results: one logical thread,
FIFO tie-breaking at equal timestamps, and named random substreams so
that one subsystem's draws never perturb another's.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass

from . import mobility as mob
from .core import SOFTWARE, Message, NodeState, TokenBudget, digest_for
from .metrics import RunRecord
from .protocols import SendBeacon, SendSoftware, UpdateLocal, on_beacon, on_software
from .radio import SpatialGrid, delivery_probability

# event kinds, processed in (time, seq) order
_INJECT = 0
_BEACON = 1  # periodic beacon, handled at its delivery tick
_TX_BEACON = 2  # pull beacon emitted by a protocol action
_TX_SOFTWARE = 3

GRID_EPOCH_MS = 100


@dataclass(frozen=True)
class EngineParams:
    beacon_period: int = 100  # ms
    delivery_latency: int = 1  # ms
    duration: int = 50_000  # ms
    injection_time: int = 1_000  # ms
    injected_version: int = 1
    corruption_probability: float = 0.0

    def __post_init__(self):
        if self.beacon_period <= 0:
            raise ValueError("beacon_period must be positive")
        if self.delivery_latency < 0:
            raise ValueError("delivery_latency must be >= 0")
        if not 0 <= self.injection_time < self.duration:
            raise ValueError("injection_time must fall inside the run")
        if self.injected_version <= 0:
            raise ValueError("injected version must be > 0")
        if not 0 <= self.corruption_probability < 1:
            raise ValueError("corruption_probability must be in [0, 1)")


def verify_digest(
    message: Message, rng: random.Random, corruption_probability: float
) -> bool:
    """Check a received software copy; corruption is injected fault load."""
    if message.kind != SOFTWARE:
        raise AssertionError("verify_digest takes software messages")
    if rng.random() < corruption_probability:
        return False
    return message.payload_digest == digest_for(message.payload_version)


def _stream(seed: int, name: str) -> random.Random:
    # str seeding is hash-based (sha512) and stable across platforms
    return random.Random(f"{seed}/{name}")


class Simulation:
    def __init__(self, spec, record_actions: bool = False):
        self.spec = spec
        self.cfg = spec.protocol
        self.ep: EngineParams = spec.engine
        self.seed = spec.seed
        self.record_actions = record_actions

        self.rng_radio = _stream(self.seed, "radio")
        self.rng_corruption = _stream(self.seed, "corruption")
        rng_place = _stream(self.seed, "placement")
        rng_phase = _stream(self.seed, "phases")
        self.rng_inject = _stream(self.seed, "injection")

        self.trace = None
        self.motions: list[mob.NodeMotion] = []
        if spec.trace is not None:
            self.trace = mob.load_trace(spec.trace)
            n = self.trace.node_count
        else:
            n = spec.n_nodes
        self.n = n

        tokens = (
            self.cfg.initial_tokens if self.cfg.token_control else 1
        )
        self.states = [
            NodeState(i, version=0, tokens=TokenBudget(tokens, tokens))
            for i in range(n)
        ]

        if self.trace is None:
            node = 0
            for count, area in spec.node_areas():
                for _ in range(count):
                    pos = (
                        rng_place.uniform(area.x_min, area.x_max),
                        rng_place.uniform(area.y_min, area.y_max),
                    )
                    motion = mob.NodeMotion(
                        pos, area, spec.mobility, _stream(self.seed, f"mobility/{node}")
                    )
                    self.states[node].position = pos
                    self.states[node].motion = motion
                    self.motions.append(motion)
                    node += 1
            assert node == n
            margin = spec.mobility.speed_max * GRID_EPOCH_MS / 1000.0
            self.grid = SpatialGrid(spec.radio.R + margin)
            self.grid_valid_until = -1.0
            self.radio = spec.radio

        self.phases = [rng_phase.randrange(self.ep.beacon_period) for _ in range(n)]

        # tallies
        self.update_events: list[tuple[int, int, int]] = []
        self.software_sends: dict[int, dict[int, int]] = {}
        self.beacon_sends: dict[int, int] = {}
        self.beacon_receptions = 0
        self.beacon_tx_count = 0
        self.beacon_rx_sum = 0
        self.actions: list[tuple] = []

        self.heap: list[tuple] = []
        self.seq = 0

    # -- scheduling ---------------------------------------------------

    def _push(self, at: int, kind: int, a: int, b) -> None:
        if at > self.ep.duration:
            return
        heapq.heappush(self.heap, (at, self.seq, kind, a, b))
        self.seq += 1

    # -- radio --------------------------------------------------------

    def _receivers(self, sender: int, t: int) -> list[int]:
        if self.trace is not None:
            return self.trace.partners(sender, t)
        if t > self.grid_valid_until:
            self.grid.rebuild(
                (i, *m.position_at(t)) for i, m in enumerate(self.motions)
            )
            self.grid_valid_until = t + GRID_EPOCH_MS
        sx, sy = self.motions[sender].position_at(t)
        out = []
        rng = self.rng_radio
        radio = self.radio
        for node in sorted(self.grid.candidates(sx, sy)):
            if node == sender:
                continue
            x, y = self.motions[node].position_at(t)
            prob = delivery_probability(math.hypot(x - sx, y - sy), radio)
            if prob >= 1.0 or (prob > 0.0 and rng.random() < prob):
                out.append(node)
        return out

    # -- protocol plumbing ---------------------------------------------

    def _apply(self, node: int, t: int, state: NodeState, actions) -> None:
        self.states[node] = state
        cfg = self.cfg
        for act in actions:
            if type(act) is SendSoftware:
                per = self.software_sends.setdefault(node, {})
                per[act.version] = per.get(act.version, 0) + 1
                self._push(t + self.ep.delivery_latency, _TX_SOFTWARE, node, act.version)
            elif type(act) is SendBeacon:
                self.beacon_sends[node] = self.beacon_sends.get(node, 0) + 1
                version = state.version if cfg.piggyback else None
                self._push(t + self.ep.delivery_latency, _TX_BEACON, node, version)
            else:  # UpdateLocal
                self.update_events.append((t, node, act.version))
            if self.record_actions:
                self.actions.append((t, node, act))

    def _deliver_beacon(self, receiver: int, version, t: int) -> None:
        self.beacon_receptions += 1
        state, acts = on_beacon(self.states[receiver], self.cfg, version)
        if acts:
            self._apply(receiver, t, state, acts)
        else:
            self.states[receiver] = state

    def _deliver_software(self, receiver: int, version: int, t: int) -> None:
        msg = Message(SOFTWARE, receiver, version, digest_for(version))
        ok = verify_digest(msg, self.rng_corruption, self.ep.corruption_probability)
        state, acts = on_software(self.states[receiver], self.cfg, version, ok)
        if acts:
            self._apply(receiver, t, state, acts)
        else:
            self.states[receiver] = state

    # -- main loop ------------------------------------------------------

    def run(self) -> RunRecord:
        ep = self.ep
        cfg = self.cfg
        latency = ep.delivery_latency
        self._push(ep.injection_time, _INJECT, 0, None)
        for node, phase in enumerate(self.phases):
            self._push(phase + latency, _BEACON, node, None)

        heap = self.heap
        while heap:
            at, _, kind, node, payload = heapq.heappop(heap)
            if kind == _BEACON:
                # fired at (at - latency); sampled at the delivery tick
                self.beacon_sends[node] = self.beacon_sends.get(node, 0) + 1
                receivers = self._receivers(node, at)
                self.beacon_tx_count += 1
                self.beacon_rx_sum += len(receivers)
                version = self.states[node].version if cfg.piggyback else None
                for rcv in receivers:
                    self._deliver_beacon(rcv, version, at)
                self._push(at + ep.beacon_period, _BEACON, node, None)
            elif kind == _TX_SOFTWARE:
                for rcv in self._receivers(node, at):
                    self._deliver_software(rcv, payload, at)
            elif kind == _TX_BEACON:
                receivers = self._receivers(node, at)
                self.beacon_tx_count += 1
                self.beacon_rx_sum += len(receivers)
                for rcv in receivers:
                    self._deliver_beacon(rcv, payload, at)
            else:  # _INJECT
                target = self.rng_inject.randrange(self.n)
                state = self.states[target]
                tokens = state.tokens
                if cfg.token_control:
                    tokens = TokenBudget(cfg.initial_tokens, cfg.initial_tokens)
                state.version = ep.injected_version
                state.tokens = tokens
                self.update_events.append((at, target, ep.injected_version))
                if self.record_actions:
                    self.actions.append((at, target, UpdateLocal(ep.injected_version)))

        return self._record()

    def _record(self) -> RunRecord:
        ep = self.ep
        cfg = self.cfg
        spec = self.spec
        metadata = {
            "beacon_period_ms": str(ep.beacon_period),
            "delivery_latency_ms": str(ep.delivery_latency),
            "duration_ms": str(ep.duration),
            "injection_time_ms": str(ep.injection_time),
            "injected_version": str(ep.injected_version),
            "corruption_probability": repr(ep.corruption_probability),
            "tie_break": "fifo_insertion_seq",
            "beacon_phase": "uniform_int[0,beacon_period)",
            "pause_distribution": "uniform[0,pause_max]",
            "leg_model": "direction~U[0,2pi), duration~U[min,max], speed~U[min,max]",
            "border_rule": "specular_reflection",
            "digest": "md5/128bit",
            "rng_substreams": "placement,phases,injection,radio,corruption,mobility/<node>",
            "grid_epoch_ms": str(GRID_EPOCH_MS),
            "nominal_payload_bytes": "1024",
            "trace_mode": str(self.trace is not None).lower(),
        }
        return RunRecord(
            n_nodes=self.n,
            duration_ms=ep.duration,
            seed=self.seed,
            protocol=cfg.name,
            tokens=cfg.initial_tokens if cfg.token_control else None,
            workload_fingerprint=spec.workload_fingerprint(),
            injected_version=ep.injected_version,
            update_events=self.update_events,
            software_sends=self.software_sends,
            beacon_sends=self.beacon_sends,
            beacon_receptions=self.beacon_receptions,
            beacon_tx_count=self.beacon_tx_count,
            beacon_rx_sum=self.beacon_rx_sum,
            metadata=metadata,
            action_log=self.actions if self.record_actions else None,
        )


def run(spec, record_actions: bool = False) -> RunRecord:
    """Execute one scenario and return its RunRecord."""
    return Simulation(spec, record_actions=record_actions).run()
