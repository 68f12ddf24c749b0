"""Gossip-based software-update dissemination simulator for mobile WSNs."""

from .core import Message, NodeState, TokenBudget, newer, refill_tokens, spend_token
from .engine import EngineParams, Simulation, run, verify_digest
from .metrics import (
    RunRecord,
    TheoreticalParams,
    bound_fcp,
    bound_flooding,
    bound_gcp,
    bound_pbp,
    convergence_series,
    gossip_reliability,
    load_histogram,
    savings,
    time_to_fraction,
)
from .mobility import AreaRect, ContactTrace, MobilityParams, contacts_at, load_trace
from .protocols import ProtocolConfig, fcp, fp, gcp, make_beacon, on_beacon, on_software, pbp
from .radio import RadioParams, delivery_probability, sample_receivers
from .scenarios import ScenarioSpec, builtin, desk_scale, parse, render

__version__ = "0.1.0"
