import pytest

from gossim.core import (
    BEACON,
    SOFTWARE,
    Message,
    NodeState,
    TokenBudget,
    digest_for,
    newer,
    refill_tokens,
    spend_token,
)


def test_newer_is_strict():
    assert newer(2, 1)
    assert not newer(1, 1)
    assert not newer(0, 1)


class TestTokenBudget:
    def test_spend_and_refill(self):
        t = TokenBudget(3, 3)
        t = spend_token(t)
        assert t == TokenBudget(2, 3)
        t = spend_token(spend_token(t))
        assert t.remaining == 0
        assert refill_tokens(t) == TokenBudget(3, 3)

    def test_spend_on_empty_is_a_bug(self):
        with pytest.raises(AssertionError):
            spend_token(TokenBudget(0, 2))

    def test_validation(self):
        with pytest.raises(ValueError):
            TokenBudget(1, 0)
        with pytest.raises(ValueError):
            TokenBudget(-1, 3)
        with pytest.raises(ValueError):
            TokenBudget(4, 3)


def test_digest_is_stable_and_version_specific():
    assert digest_for(7) == digest_for(7)
    assert digest_for(7) != digest_for(8)
    # 128-bit hex digest
    assert len(digest_for(1)) == 32
    int(digest_for(1), 16)


class TestMessage:
    def test_software_requires_payload(self):
        with pytest.raises(ValueError):
            Message(SOFTWARE, sender=0)
        m = Message(SOFTWARE, sender=0, payload_version=3, payload_digest=digest_for(3))
        assert m.payload_version == 3

    def test_bare_beacon_ok(self):
        m = Message(BEACON, sender=4)
        assert m.payload_version is None

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            Message("telemetry", sender=0)


def test_node_state_defaults():
    s = NodeState(9)
    assert s.version == 0
    assert s.tokens == TokenBudget(1, 1)
    assert s.position is None
