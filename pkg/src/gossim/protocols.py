"""The four dissemination protocols as one machine with two feature flags.

flags (piggyback, token_control): FP=(False,False), FCP=(False,True),
PBP=(True,False), GCP=(True,True).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from .core import (
    BEACON,
    Message,
    NodeState,
    VersionNumber,
    digest_for,
    refill_tokens,
    spend_token,
)


@dataclass(frozen=True)
class ProtocolConfig:
    piggyback: bool
    token_control: bool
    initial_tokens: int = 1  # ignored unless token_control

    def __post_init__(self):
        if self.token_control:
            if self.initial_tokens <= 0:
                raise ValueError("token_control requires a positive token budget")
        else:
            # normalize the unused budget so configs compare by behaviour
            object.__setattr__(self, "initial_tokens", 1)

    @property
    def name(self) -> str:
        return {
            (False, False): "fp",
            (False, True): "fcp",
            (True, False): "pbp",
            (True, True): "gcp",
        }[(self.piggyback, self.token_control)]


def fp() -> ProtocolConfig:
    return ProtocolConfig(piggyback=False, token_control=False)


def fcp(tokens: int) -> ProtocolConfig:
    return ProtocolConfig(piggyback=False, token_control=True, initial_tokens=tokens)


def pbp() -> ProtocolConfig:
    return ProtocolConfig(piggyback=True, token_control=False)


def gcp(tokens: int) -> ProtocolConfig:
    return ProtocolConfig(piggyback=True, token_control=True, initial_tokens=tokens)


BY_NAME = {"fp": fp, "fcp": fcp, "pbp": pbp, "gcp": gcp}


@dataclass(frozen=True)
class SendSoftware:
    version: VersionNumber
    digest: str


@dataclass(frozen=True)
class SendBeacon:
    pass


@dataclass(frozen=True)
class UpdateLocal:
    version: VersionNumber


ProtocolAction = Union[SendSoftware, SendBeacon, UpdateLocal]


def on_beacon(
    state: NodeState,
    cfg: ProtocolConfig,
    remote_version: Optional[VersionNumber],
) -> tuple[NodeState, list[ProtocolAction]]:
    """React to a received beacon.

    Without piggyback the remote version is unknown, so the node pushes
    its software unconditionally (token-gated for FCP).  With piggyback
    it pushes only to older neighbours and pulls (by beaconing back)
    from newer ones.
    """
    if cfg.piggyback:
        if remote_version is None:
            raise AssertionError("piggyback protocol got a bare beacon")
        if remote_version < state.version:
            if cfg.token_control:
                if state.tokens.remaining > 0:
                    new = replace(state, tokens=spend_token(state.tokens))
                    return new, [SendSoftware(new.version, digest_for(new.version))]
                return state, []
            return state, [SendSoftware(state.version, digest_for(state.version))]
        if remote_version > state.version:
            return state, [SendBeacon()]
        return state, []
    if remote_version is not None:
        raise AssertionError("non-piggyback protocol got a versioned beacon")
    if cfg.token_control:
        if state.tokens.remaining > 0:
            new = replace(state, tokens=spend_token(state.tokens))
            return new, [SendSoftware(new.version, digest_for(new.version))]
        return state, []
    return state, [SendSoftware(state.version, digest_for(state.version))]


def on_software(
    state: NodeState,
    cfg: ProtocolConfig,
    payload_version: VersionNumber,
    digest_ok: bool,
) -> tuple[NodeState, list[ProtocolAction]]:
    """React to a received software copy (requested or overheard)."""
    if not digest_ok:
        # corrupted copy: re-request with a beacon
        return state, [SendBeacon()]
    if payload_version > state.version:
        tokens = state.tokens
        if cfg.token_control:
            tokens = refill_tokens(tokens)
        new = replace(state, version=payload_version, tokens=tokens)
        return new, [UpdateLocal(payload_version)]
    return state, []


def make_beacon(state: NodeState, cfg: ProtocolConfig) -> Message:
    return Message(
        kind=BEACON,
        sender=state.id,
        payload_version=state.version if cfg.piggyback else None,
    )
