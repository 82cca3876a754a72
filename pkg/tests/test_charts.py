import math

import pytest

from conftest import random_params
from pldisk.charts import (ChartId, ChartPoint, chart_field, chart_for_point,
                           from_chart, infinity_equilibria,
                           pushforward_consistency_residual, to_chart)
from pldisk.errors import ChartDomainError, InfinityPointError
from pldisk.model import make_params


class TestTransforms:
    def test_to_chart_examples(self):
        c = to_chart("U1", (2.0, 8.0))
        assert (c.lambda1, c.lambda2) == (0.5, 2.0)
        c = to_chart("U2", (0.0, 4.0))
        assert (c.lambda1, c.lambda2) == (0.5, 0.0)

    def test_domain_errors(self):
        with pytest.raises(ChartDomainError):
            to_chart("U1", (-1.0, 0.0))
        with pytest.raises(ChartDomainError):
            to_chart("V1", (1.0, 0.0))
        with pytest.raises(ChartDomainError):
            to_chart("U2", (0.0, -1.0))
        with pytest.raises(ChartDomainError):
            to_chart("V2", (0.0, 1.0))

    def test_from_chart_examples(self):
        pt = from_chart(ChartPoint("U1", 0.5, 2.0))
        assert (pt.u, pt.v) == (2.0, 8.0)
        pt = from_chart(ChartPoint("V1", 0.5, 2.0))
        assert (pt.u, pt.v) == (-2.0, -8.0)

    def test_infinity_error(self):
        with pytest.raises(InfinityPointError):
            from_chart(ChartPoint("U1", 0.0, 1.0))

    def test_round_trips(self, rng):
        for _ in range(50):
            u = float(rng.uniform(-5, 5))
            v = float(rng.uniform(-30, 30))
            if abs(u) < 1e-3 and abs(v) < 1e-3:
                continue
            for chart in ChartId:
                valid = {"U1": u > 0, "V1": u < 0, "U2": v > 0, "V2": v < 0}[chart.value]
                if not valid:
                    continue
                back = from_chart(to_chart(chart, (u, v)))
                assert back.u == pytest.approx(u, rel=1e-12, abs=1e-12)
                assert back.v == pytest.approx(v, rel=1e-12, abs=1e-12)


class TestChartFields:
    def test_pinned_values(self, p_sub):
        f = chart_field(ChartPoint("U1", 0.0, 1.0), p_sub)
        assert f == pytest.approx((0.0, 0.0), abs=1e-15)
        f = chart_field(ChartPoint("U2", 0.0, 1.0), p_sub)
        assert f == pytest.approx((0.0, 0.0), abs=1e-15)
        f = chart_field(ChartPoint("U1", 0.0, 0.0), p_sub)
        assert f == pytest.approx((0.0, 2.0), abs=1e-15)

    def test_fields_vanish_at_infinity_equilibria(self, rng):
        for p in random_params(rng, 15):
            for chart in ChartId:
                for cpt in infinity_equilibria(chart, p):
                    f = chart_field(cpt, p)
                    assert math.hypot(*f) < 1e-12 * (1 + p.mu * (1 + p.alpha + p.D))

    def test_pushforward_consistency(self, rng):
        # chart_field equals lambda1 * d(to_chart) . field_tau for interior
        # points with lambda1 in (0.05, 1)
        worst = 0.0
        for p in random_params(rng, 10):
            for _ in range(8):
                chart = list(ChartId)[rng.integers(0, 4)]
                l1 = float(rng.uniform(0.05, 1.0))
                l2 = float(rng.uniform(-1.2, 1.2))
                pt = from_chart(ChartPoint(chart, l1, l2))
                worst = max(worst, pushforward_consistency_residual(
                    p, (pt.u, pt.v), chart))
        assert worst <= 1e-9

    def test_overlap_consistency(self, rng):
        # the same orbit point seen in U1 and U2 maps across charts to 1e-9
        for _ in range(25):
            u = float(rng.uniform(3.0, 40.0))
            v = float(rng.uniform(0.5, 3.0)) * u * u
            a = to_chart("U1", (u, v))
            b = to_chart("U2", (u, v))
            via = to_chart("U2", (from_chart(a).u, from_chart(a).v))
            assert via.lambda1 == pytest.approx(b.lambda1, rel=1e-9)
            assert via.lambda2 == pytest.approx(b.lambda2, rel=1e-9)
            # transition map on the overlap: sigma2 = lambda2^(-1/2)
            assert b.lambda2 == pytest.approx(a.lambda2 ** -0.5, rel=1e-12)


class TestInfinityEquilibria:
    def test_horizontal_levels(self):
        p = make_params(1, 1, 1)
        pts = infinity_equilibria("U1", p)
        assert [(c.lambda1, c.lambda2) for c in pts] == [(0.0, -1.0), (0.0, 1.0)]
        pts = infinity_equilibria("V2", p)
        assert [(c.lambda1, c.lambda2) for c in pts] == [(0.0, -1.0), (0.0, 1.0)]

    def test_vertical_level_is_field_root(self):
        # For alpha*mu != 1 the vertical-chart equilibria sit at the quartic
        # root (alpha*mu)^(-1/4); the printed sqrt((alpha*mu)^-1) value is not
        # a zero of the chart field.
        p = make_params(1, 4, 1)
        pts = infinity_equilibria("U2", p)
        level = (p.alpha * p.mu) ** -0.25
        assert pts[1].lambda2 == pytest.approx(level, rel=1e-14)
        assert math.hypot(*chart_field(pts[1], p)) < 1e-14
        not_eq = ChartPoint("U2", 0.0, math.sqrt(1.0 / (p.alpha * p.mu)))
        assert math.hypot(*chart_field(not_eq, p)) > 0.5

    def test_chart_selection(self):
        assert chart_for_point(10.0, 3.0) is ChartId.U1
        assert chart_for_point(-10.0, 3.0) is ChartId.V1
        assert chart_for_point(0.5, 30.0) is ChartId.U2
        assert chart_for_point(0.5, -30.0) is ChartId.V2


def test_chart_point_json_round_trip():
    cpt = ChartPoint("V2", 0.25, -1.5)
    data = cpt.to_json()
    assert data == {"chart": "V2", "l1": 0.25, "l2": -1.5}
    back = ChartPoint.from_json(data)
    assert back == cpt
