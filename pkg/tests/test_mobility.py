import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gossim.mobility import (
    AreaRect,
    ContactInterval,
    ContactTrace,
    MobilityParams,
    NodeMotion,
    TRACE_HEADER,
    _fold,
    bounce,
    contacts_at,
    load_trace,
)

AREA = AreaRect(0.0, 0.0, 10.0, 10.0)


class TestFold:
    def test_inside_unchanged(self):
        assert _fold(4.2, 0.0, 10.0) == 4.2

    def test_single_reflection(self):
        assert _fold(11.0, 0.0, 10.0) == pytest.approx(9.0)
        assert _fold(-2.0, 0.0, 10.0) == pytest.approx(2.0)

    def test_many_reflections(self):
        assert _fold(47.0, 0.0, 10.0) == pytest.approx(7.0)

    @given(st.floats(min_value=-1e6, max_value=1e6))
    def test_always_in_bounds(self, u):
        assert 0.0 <= _fold(u, 0.0, 10.0) <= 10.0

    @given(st.floats(min_value=0.0, max_value=200.0), st.floats(min_value=-2.0, max_value=2.0))
    @settings(max_examples=100, deadline=None)
    def test_matches_per_tick_reflection(self, dt, v):
        """Analytic fold equals integrating the leg in tiny steps and
        mirroring each wall overshoot."""
        x, vel = 5.0, v
        steps = 400
        h = dt / steps
        for _ in range(steps):
            x += vel * h
            if x > 10.0:
                x, vel = 20.0 - x, -vel
            elif x < 0.0:
                x, vel = -x, -vel
        assert _fold(5.0 + v * dt, 0.0, 10.0) == pytest.approx(x, abs=1e-6)


class TestBounce:
    def test_right_wall(self):
        (x, y), (dx, dy) = bounce((11.0, 5.0), (0.6, 0.8), AREA)
        assert (x, y) == (pytest.approx(9.0), 5.0)
        assert (dx, dy) == (-0.6, 0.8)

    def test_corner_reflects_both_axes(self):
        d = 1.0 / math.sqrt(2.0)
        (x, y), (dx, dy) = bounce((11.0, 12.0), (d, d), AREA)
        assert (x, y) == (pytest.approx(9.0), pytest.approx(8.0))
        assert (dx, dy) == (-d, -d)

    def test_inside_is_identity(self):
        pos, vel = bounce((3.0, 3.0), (1.0, 0.0), AREA)
        assert pos == (3.0, 3.0) and vel == (1.0, 0.0)


class TestNodeMotion:
    def test_stays_in_area(self):
        m = NodeMotion((5.0, 5.0), AREA, MobilityParams(), random.Random(2))
        for t in range(0, 60_000, 37):
            x, y = m.position_at(t)
            assert AREA.contains(x, y)

    def test_backwards_query_is_a_bug(self):
        m = NodeMotion((5.0, 5.0), AREA, MobilityParams(), random.Random(2))
        m.position_at(500)
        with pytest.raises(AssertionError):
            m.position_at(499)

    def test_repeat_query_is_stable(self):
        m = NodeMotion((5.0, 5.0), AREA, MobilityParams(), random.Random(5))
        assert m.position_at(1234) == m.position_at(1234)

    def test_initial_position_outside_rejected(self):
        with pytest.raises(ValueError):
            NodeMotion((11.0, 5.0), AREA, MobilityParams(), random.Random(0))

    def test_per_ms_displacement_bounded_by_speed(self):
        # huge area so folding never shortens a step
        big = AreaRect(-1e6, -1e6, 1e6, 1e6)
        params = MobilityParams()
        m = NodeMotion((0.0, 0.0), big, params, random.Random(9))
        prev = m.position_at(0)
        moved = 0.0
        for t in range(1, 20_000):
            cur = m.position_at(t)
            step = math.hypot(cur[0] - prev[0], cur[1] - prev[1])
            assert step <= params.speed_max / 1000.0 + 1e-9
            moved += step
            prev = cur
        # average speed over legs and pauses lands between the extremes
        mean_speed = moved / 20.0  # metres over 20 s
        assert params.speed_min * 0.5 < mean_speed < params.speed_max

    def test_pauses_happen(self):
        big = AreaRect(-1e6, -1e6, 1e6, 1e6)
        m = NodeMotion((0.0, 0.0), big, MobilityParams(), random.Random(4))
        prev = m.position_at(0)
        still = 0
        for t in range(1, 10_000):
            cur = m.position_at(t)
            if cur == prev:
                still += 1
            prev = cur
        assert still > 0


class TestContactTrace:
    def _trace(self):
        return ContactTrace([
            ContactInterval(10, 20, 0, 1),
            ContactInterval(15, 30, 1, 2),
        ])

    def test_intervals_are_half_open(self):
        tr = self._trace()
        assert tr.partners(0, 10) == [1]
        assert tr.partners(0, 19.999) == [1]
        assert tr.partners(0, 20) == []
        assert tr.partners(0, 9.999) == []

    def test_partners_symmetric(self):
        tr = self._trace()
        assert tr.partners(1, 16) == [0, 2]
        assert tr.partners(2, 16) == [1]

    def test_contacts_at(self):
        tr = self._trace()
        assert contacts_at(tr, 16) == {(0, 1), (1, 2)}
        assert contacts_at(tr, 25) == {(1, 2)}

    def test_node_count(self):
        assert self._trace().node_count == 3

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            ContactInterval(10, 10, 0, 1)
        with pytest.raises(ValueError):
            ContactInterval(5, 10, 3, 3)


class TestLoadTrace:
    def _write(self, tmp_path, rows):
        p = tmp_path / "trace.csv"
        p.write_text("\n".join([",".join(TRACE_HEADER)] + rows) + "\n")
        return p

    def test_round_trip(self, tmp_path):
        p = self._write(tmp_path, ["0,100,0,1", "50,200,1,2"])
        tr = load_trace(p)
        assert len(tr.intervals) == 2
        assert tr.node_count == 3

    def test_bad_header(self, tmp_path):
        p = tmp_path / "trace.csv"
        p.write_text("start,end,a,b\n0,1,0,1\n")
        with pytest.raises(ValueError, match="header"):
            load_trace(p)

    def test_error_carries_line_number(self, tmp_path):
        p = self._write(tmp_path, ["0,100,0,1", "7,abc,1,2"])
        with pytest.raises(ValueError, match=":3:"):
            load_trace(p)

    def test_empty_interval_rejected(self, tmp_path):
        p = self._write(tmp_path, ["100,100,0,1"])
        with pytest.raises(ValueError, match=":2:"):
            load_trace(p)

    def test_empty_trace_rejected(self, tmp_path):
        p = self._write(tmp_path, [])
        with pytest.raises(ValueError, match="empty"):
            load_trace(p)
