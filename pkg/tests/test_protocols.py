import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gossim.core import BEACON, NodeState, TokenBudget, digest_for
from gossim.protocols import (
    ProtocolConfig,
    SendBeacon,
    SendSoftware,
    UpdateLocal,
    fcp,
    fp,
    gcp,
    make_beacon,
    on_beacon,
    on_software,
    pbp,
)


def node(version=0, remaining=1, initial=1):
    return NodeState(0, version=version, tokens=TokenBudget(remaining, initial))


class TestConstructors:
    def test_flag_square(self):
        assert (fp().piggyback, fp().token_control) == (False, False)
        assert (fcp(3).piggyback, fcp(3).token_control) == (False, True)
        assert (pbp().piggyback, pbp().token_control) == (True, False)
        assert (gcp(3).piggyback, gcp(3).token_control) == (True, True)

    def test_names(self):
        assert fp().name == "fp"
        assert fcp(2).name == "fcp"
        assert pbp().name == "pbp"
        assert gcp(2).name == "gcp"

    def test_tokens_require_budget(self):
        with pytest.raises(ValueError):
            fcp(0)
        with pytest.raises(ValueError):
            gcp(-1)

    def test_unused_budget_normalized(self):
        # without token control the budget is behaviourally irrelevant
        assert ProtocolConfig(False, False, 7) == fp()


class TestOnBeacon:
    def test_fp_always_pushes(self):
        s = node(version=0)
        _, acts = on_beacon(s, fp(), None)
        assert acts == [SendSoftware(0, digest_for(0))]

    def test_fcp_spends_then_stops(self):
        s = node(version=2, remaining=1, initial=1)
        s, acts = on_beacon(s, fcp(1), None)
        assert acts == [SendSoftware(2, digest_for(2))]
        assert s.tokens.remaining == 0
        s, acts = on_beacon(s, fcp(1), None)
        assert acts == []

    def test_pbp_pushes_to_older(self):
        _, acts = on_beacon(node(version=3), pbp(), 1)
        assert acts == [SendSoftware(3, digest_for(3))]

    def test_pbp_pulls_from_newer(self):
        _, acts = on_beacon(node(version=1), pbp(), 3)
        assert acts == [SendBeacon()]

    def test_pbp_silent_on_equal(self):
        _, acts = on_beacon(node(version=2), pbp(), 2)
        assert acts == []

    def test_gcp_pushes_only_with_tokens(self):
        s = node(version=3, remaining=0, initial=2)
        _, acts = on_beacon(s, gcp(2), 1)
        assert acts == []
        s = node(version=3, remaining=1, initial=2)
        s, acts = on_beacon(s, gcp(2), 1)
        assert acts == [SendSoftware(3, digest_for(3))]
        assert s.tokens.remaining == 0

    def test_gcp_pull_costs_nothing(self):
        s = node(version=1, remaining=0, initial=2)
        s, acts = on_beacon(s, gcp(2), 4)
        assert acts == [SendBeacon()]
        assert s.tokens.remaining == 0

    def test_version_visibility_enforced(self):
        with pytest.raises(AssertionError):
            on_beacon(node(), pbp(), None)
        with pytest.raises(AssertionError):
            on_beacon(node(), fp(), 1)

    def test_inputs_not_mutated(self):
        s = node(version=3, remaining=2, initial=2)
        on_beacon(s, gcp(2), 0)
        assert s.tokens == TokenBudget(2, 2)


class TestOnSoftware:
    def test_newer_version_adopted(self):
        s, acts = on_software(node(version=1), fp(), 2, True)
        assert acts == [UpdateLocal(2)]
        assert s.version == 2

    def test_stale_copy_ignored(self):
        s, acts = on_software(node(version=2), fp(), 1, True)
        assert acts == [] and s.version == 2
        s, acts = on_software(node(version=2), pbp(), 2, True)
        assert acts == []

    def test_corrupt_copy_rerequested(self):
        _, acts = on_software(node(version=0), gcp(2), 5, False)
        assert acts == [SendBeacon()]

    def test_update_refills_tokens(self):
        s = node(version=0, remaining=0, initial=3)
        s, _ = on_software(s, gcp(3), 1, True)
        assert s.tokens == TokenBudget(3, 3)

    def test_update_keeps_tokens_without_control(self):
        s = node(version=0, remaining=0, initial=3)
        s, _ = on_software(s, pbp(), 1, True)
        assert s.tokens == TokenBudget(0, 3)


def test_make_beacon_piggybacks_version():
    s = node(version=4)
    assert make_beacon(s, pbp()).payload_version == 4
    assert make_beacon(s, fp()).payload_version is None
    assert make_beacon(s, fp()).kind == BEACON


# -- reference machines ------------------------------------------------------
# Independent re-implementations of the four protocols, written directly
# from their behavioural descriptions, used as oracles for the single
# parametric machine.


def _ref_step(proto, state, event):
    version, tok, init = state
    out = []
    if event[0] == "beacon":
        remote = event[1]
        if proto == "fp":
            out.append(("software", version))
        elif proto == "fcp":
            if tok > 0:
                tok -= 1
                out.append(("software", version))
        elif proto == "pbp":
            if remote < version:
                out.append(("software", version))
            elif remote > version:
                out.append(("beacon",))
        else:  # gcp
            if remote < version and tok > 0:
                tok -= 1
                out.append(("software", version))
            elif remote > version:
                out.append(("beacon",))
    else:  # software
        payload, ok = event[1], event[2]
        if not ok:
            out.append(("beacon",))
        elif payload > version:
            version = payload
            if proto in ("fcp", "gcp"):
                tok = init
            out.append(("update", payload))
    return (version, tok, init), out


def _machine_step(cfg, state, event):
    if event[0] == "beacon":
        remote = event[1] if cfg.piggyback else None
        new, acts = on_beacon(state, cfg, remote)
    else:
        new, acts = on_software(state, cfg, event[1], event[2])
    flat = []
    for a in acts:
        if isinstance(a, SendSoftware):
            assert a.digest == digest_for(a.version)
            flat.append(("software", a.version))
        elif isinstance(a, SendBeacon):
            flat.append(("beacon",))
        else:
            flat.append(("update", a.version))
    return new, flat


_events = st.lists(
    st.one_of(
        st.tuples(st.just("beacon"), st.integers(min_value=0, max_value=4)),
        st.tuples(
            st.just("software"),
            st.integers(min_value=0, max_value=4),
            st.booleans(),
        ),
    ),
    max_size=30,
)


@given(
    proto=st.sampled_from(["fp", "fcp", "pbp", "gcp"]),
    tokens=st.integers(min_value=1, max_value=4),
    start_version=st.integers(min_value=0, max_value=3),
    events=_events,
)
@settings(max_examples=400, deadline=None)
def test_machine_matches_reference(proto, tokens, start_version, events):
    cfg = {
        "fp": fp(),
        "fcp": fcp(tokens),
        "pbp": pbp(),
        "gcp": gcp(tokens),
    }[proto]
    init = tokens if cfg.token_control else 1
    ref = (start_version, init, init)
    state = node(version=start_version, remaining=init, initial=init)
    for event in events:
        ref, want = _ref_step(proto, ref, event)
        state, got = _machine_step(cfg, state, event)
        assert got == want
        assert state.version == ref[0]
        assert state.tokens.remaining == ref[1]
        assert 0 <= state.tokens.remaining <= state.tokens.initial
