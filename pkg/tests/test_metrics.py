import math

import pytest

from gossim.metrics import (
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


def record(**kw):
    defaults = dict(
        n_nodes=5,
        duration_ms=1000,
        seed=0,
        protocol="fp",
        tokens=None,
        workload_fingerprint="f" * 16,
        injected_version=1,
    )
    defaults.update(kw)
    return RunRecord(**defaults)


class TestConvergenceSeries:
    def test_basic_shape(self):
        rec = record(update_events=[(100, 0, 1), (250, 3, 1)])
        assert convergence_series(rec, 1) == [(0, 0), (100, 1), (250, 2), (1000, 2)]

    def test_same_instant_coalesced(self):
        rec = record(update_events=[(100, 0, 1), (100, 1, 1), (100, 2, 1)])
        assert convergence_series(rec, 1) == [(0, 0), (100, 3), (1000, 3)]

    def test_duplicate_node_counted_once(self):
        rec = record(update_events=[(100, 0, 1), (300, 0, 2)])
        assert convergence_series(rec, 1) == [(0, 0), (100, 1), (1000, 1)]

    def test_unknown_version_rejected(self):
        rec = record(update_events=[(100, 0, 1)])
        with pytest.raises(ValueError):
            convergence_series(rec, 7)

    def test_injected_version_allowed_even_if_unseen(self):
        rec = record(update_events=[])
        assert convergence_series(rec, 1) == [(0, 0), (1000, 0)]


class TestTimeToFraction:
    def test_hits_threshold(self):
        series = [(0, 0), (100, 3), (400, 9), (1000, 9)]
        assert time_to_fraction(series, 0.9, 10) == 400
        assert time_to_fraction(series, 0.3, 10) == 100

    def test_never_reached(self):
        series = [(0, 0), (100, 3), (1000, 3)]
        assert time_to_fraction(series, 0.9, 10) is None

    def test_fraction_validated(self):
        with pytest.raises(ValueError):
            time_to_fraction([(0, 0)], 0.0, 10)
        with pytest.raises(ValueError):
            time_to_fraction([(0, 0)], 1.5, 10)


def test_load_histogram_mass():
    rec = record(
        n_nodes=4,
        software_sends={0: {1: 2}, 2: {0: 1, 1: 1}},
    )
    hist = load_histogram(rec)
    assert hist == {2: 2, 0: 2}
    assert sum(hist.values()) == rec.n_nodes
    assert rec.total_software_sends() == 4
    assert rec.node_software_sends(2) == 2


class TestBounds:
    # one upgrade, 5 tokens, 10 neighbours, 50 s run, 100 ms beacons, 2000 nodes
    P = TheoreticalParams(n_v=1, t=5, n_nh=10.0, d=50_000.0, p_b=100.0, n_s=2000)

    def test_flooding(self):
        assert bound_flooding(self.P) == pytest.approx(5000.0)

    def test_fcp_includes_factory_version(self):
        assert bound_fcp(self.P) == pytest.approx(10.0)

    def test_pbp(self):
        assert bound_pbp(self.P) == pytest.approx(1999.0)

    def test_gcp(self):
        assert bound_gcp(self.P) == pytest.approx(5.0)

    def test_zero_upgrades_allowed(self):
        p = TheoreticalParams(n_v=0, t=5, n_nh=1.0, d=1000.0, p_b=100.0, n_s=10)
        assert bound_gcp(p) == 0.0
        assert bound_fcp(p) == 5.0

    def test_validation(self):
        with pytest.raises(ValueError):
            TheoreticalParams(n_v=1, t=0, n_nh=1.0, d=1000.0, p_b=100.0, n_s=10)


class TestGossipReliability:
    def test_known_values(self):
        assert gossip_reliability(0.0) == pytest.approx(math.exp(-1.0), abs=1e-12)
        assert gossip_reliability(3.0) == pytest.approx(0.951431, abs=1e-5)

    def test_limits(self):
        assert gossip_reliability(40.0) == pytest.approx(1.0)
        assert gossip_reliability(-40.0) == pytest.approx(0.0)


class TestSavings:
    def test_percentage(self):
        flood = record(software_sends={0: {1: 100}})
        alg = record(protocol="gcp", tokens=5, software_sends={0: {1: 3}})
        assert savings(alg, flood) == pytest.approx(97.0)

    def test_workloads_must_match(self):
        flood = record(software_sends={0: {1: 100}})
        alg = record(workload_fingerprint="0" * 16, software_sends={})
        with pytest.raises(ValueError):
            savings(alg, flood)

    def test_empty_baseline_rejected(self):
        flood = record(software_sends={})
        with pytest.raises(ValueError):
            savings(flood, flood)
