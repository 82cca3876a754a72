import numpy as np
import pytest

from conftest import random_params
from pldisk.classify import (bifurcation_scan, classify_endpoint,
                             connection_graph, expected_types,
                             periodic_annulus_edge, profile, regime_of,
                             regime_report, saddle_level_gap)
from pldisk.errors import (BracketError, PatternViolationError,
                           UnclassifiableOrbitError)
from pldisk.model import make_params, potential_U
from pldisk.orbits import reparameterize_to_x, shoot_saddle, trace_through

# Reversal (u,v) -> (u,-v) swaps the unstable/stable corner representatives.
_REVERSAL_MAP = {"E0": "E0", "E1": "E1", "E2": "E2",
                 "E3": "E4", "E4": "E3", "E5": "E6", "E6": "E5"}


@pytest.fixture(scope="module")
def graphs():
    return {name: connection_graph(make_params(D, 1, 1))
            for name, D in (("sub", 1.0), ("critical", 2.0), ("super", 4.0))}


class TestEndpointClassification:
    def test_unbounded_state(self, p_sub):
        orbit = shoot_saddle(p_sub, "E1", "unstable_plus")
        assert classify_endpoint(orbit, "left", "x") == "1"
        assert classify_endpoint(orbit, "right", "x") == "inf"
        assert classify_endpoint(orbit, "right", "tau") == "inf"

    def test_homoclinic_both_modes(self, p_sub):
        orbit = shoot_saddle(p_sub, "E2", "unstable_plus")
        assert classify_endpoint(orbit, "left", "x") == "qs-"
        assert classify_endpoint(orbit, "right", "x") == "qs+"
        assert classify_endpoint(orbit, "left", "tau") == "-1/k"
        assert classify_endpoint(orbit, "right", "tau") == "-1/k"

    def test_left_region_has_no_x_type(self, p_sub):
        orbit = shoot_saddle(p_sub, "E2", "unstable_minus")  # runs to u -> -inf
        assert classify_endpoint(orbit, "right", "tau") == "-inf"
        with pytest.raises(UnclassifiableOrbitError):
            classify_endpoint(orbit, "right", "x")

    def test_truncated_orbit_unclassifiable(self, p_sub):
        from pldisk.orbits import integrate

        orbit = integrate(p_sub, (0.2, 0.0), t_cap=1.0)
        with pytest.raises(UnclassifiableOrbitError):
            classify_endpoint(orbit, "right", "x")


class TestConnectionGraph:
    def test_sub_edges(self, graphs):
        g = graphs["sub"]
        for edge in (("E2", "E2"), ("E1", "E4"), ("E3", "E1"), ("E3", "E4")):
            assert g.has_edge(*edge), edge
        assert not g.has_edge("E1", "E1")
        assert not g.has_edge("E1", "E2")
        assert g.periodic is not None

    def test_critical_edges(self, graphs):
        g = graphs["critical"]
        assert g.has_edge("E1", "E2") and g.has_edge("E2", "E1")
        assert not g.has_edge("E1", "E1")
        assert not g.has_edge("E2", "E2")

    def test_super_edges(self, graphs):
        g = graphs["super"]
        for edge in (("E1", "E1"), ("E3", "E2"), ("E2", "E4")):
            assert g.has_edge(*edge), edge
        assert not g.has_edge("E2", "E2")

    def test_no_failures_at_references(self, graphs):
        for g in graphs.values():
            assert g.failures == []

    def test_reversal_symmetry_of_edges(self, graphs):
        for g in graphs.values():
            edges = g.edge_set()
            for (a, b) in edges:
                mirrored = (_REVERSAL_MAP[b], _REVERSAL_MAP[a])
                assert mirrored in edges, (a, b, mirrored)

    def test_level_obstruction(self, graphs):
        # distinct saddle levels forbid a connection between the saddles
        for name in ("sub", "super"):
            g = graphs[name]
            p = g.params
            gap = saddle_level_gap(p.D, p.alpha, p.mu)
            assert abs(gap) > 1e-3
            assert not g.has_edge("E1", "E2")
            assert not g.has_edge("E2", "E1")


class TestRegimeReport:
    def test_reference_reports_x(self, graphs):
        for name, g in graphs.items():
            rep = regime_report(g.params, "x", graph=g)
            assert rep.regime == name
            assert rep.match, rep.to_json()
            assert rep.found >= expected_types(name, "x")

    def test_reference_reports_tau(self, graphs):
        for name, g in graphs.items():
            rep = regime_report(g.params, "tau", graph=g)
            assert rep.match, rep.to_json()

    def test_super_includes_signature_types(self, graphs):
        rep = regime_report(graphs["super"].params, "x", graph=graphs["super"])
        assert {"1_1", "inf_qs+", "qs-_inf"} <= rep.found

    def test_critical_k1_tau_types(self, graphs):
        rep = regime_report(graphs["critical"].params, "tau",
                            graph=graphs["critical"])
        assert {"-1/k_1", "1_-1/k"} <= rep.found

    def test_mode_consistency(self, graphs):
        # x-mode labels substitute to the tau-mode labels edge by edge
        sub_map = {"1": "1", "qs-": "-1/k", "qs+": "-1/k", "inf": "inf"}
        for g in graphs.values():
            rx = regime_report(g.params, "x", graph=g)
            rt = regime_report(g.params, "tau", graph=g)
            for key, name in rx.edge_types.items():
                left, _, right = name.partition("_")
                expected = f"{sub_map[left]}_{sub_map[right]}"
                assert rt.edge_types[key] == expected

    def test_near_critical_smear(self):
        p = make_params(2.0 * (1 + 1e-7), 1.0, 1.0)
        regime, within = regime_of(p)
        assert regime == "critical" and within

    def test_regime_of_clean_cases(self):
        assert regime_of(make_params(1, 1, 1)) == ("sub", False)
        assert regime_of(make_params(2, 1, 1)) == ("critical", False)
        assert regime_of(make_params(4, 1, 1)) == ("super", False)


class TestBifurcationScan:
    def test_reference_root(self):
        res = bifurcation_scan(1.0, 1.0, (1.0, 4.0))
        assert res.D_star == pytest.approx(2.0, rel=1e-10)

    def test_mu_independence(self):
        res = bifurcation_scan(0.5, 3.0, (0.5, 2.0))
        assert res.D_star == pytest.approx(1.0, rel=1e-10)

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            bifurcation_scan(1.0, 1.0, (3.0, 4.0))

    def test_graph_flip_validation(self):
        res = bifurcation_scan(1.0, 1.0, (1.0, 4.0), validate=True)
        assert res.flips["sub_side"]["homoclinic_E2"]
        assert not res.flips["sub_side"]["homoclinic_E1"]
        assert res.flips["super_side"]["homoclinic_E1"]
        assert res.flips["at_star"]["heteroclinic_loop"]

    def test_gap_factored_form(self, rng):
        for _ in range(6):
            alpha = float(rng.uniform(0.3, 3.0))
            mu = float(rng.uniform(0.3, 3.0))
            D = float(rng.uniform(0.3, 5.0))
            expect = mu * (D - 2 * alpha) * (D + 2 * alpha) ** 3 / (96 * alpha ** 3)
            assert saddle_level_gap(D, alpha, mu) == pytest.approx(expect, rel=1e-11)


class TestProfile:
    def test_homoclinic_single_interior_max(self, p_sub):
        ox = reparameterize_to_x(shoot_saddle(p_sub, "E2", "unstable_plus"))
        prof = profile(ox, "qs-_qs+")
        assert len(prof.turning_points) == 1
        tp = prof.turning_points[0]
        assert tp["kind"] == "max"
        assert 0.0 < tp["u"] < 1.0

    def test_super_dip_single_min(self, p_super):
        ox = reparameterize_to_x(shoot_saddle(p_super, "E1", "unstable_minus"))
        prof = profile(ox, "1_1")
        assert len(prof.turning_points) == 1
        tp = prof.turning_points[0]
        assert tp["kind"] == "min"
        assert p_super.u_singular < tp["u"] < 0.0

    def test_infinity_family_single_min(self, p_sub):
        ox = reparameterize_to_x(trace_through(p_sub, (2.5, 0.0)))
        prof = profile(ox, "inf_inf")
        assert [t["kind"] for t in prof.turning_points] == ["min"]
        assert prof.turning_points[0]["u"] > 1.0

    def test_monotone_state(self, p_sub):
        ox = reparameterize_to_x(shoot_saddle(p_sub, "E1", "unstable_plus"))
        prof = profile(ox, "1_inf")
        assert prof.turning_points == []

    def test_pattern_violation_detected(self, p_sub):
        ox = reparameterize_to_x(shoot_saddle(p_sub, "E2", "unstable_plus"))
        with pytest.raises(PatternViolationError):
            profile(ox, "1_inf")


def test_periodic_annulus_edge_is_level_root(rng):
    for p in random_params(rng, 8):
        edge = periodic_annulus_edge(p)
        h_bound = max(potential_U(p, 1.0), potential_U(p, p.u_singular))
        if edge < 1.0:
            assert potential_U(p, edge) == pytest.approx(h_bound, abs=1e-10)
        else:
            # the u=1 saddle binds the annulus
            assert potential_U(p, 1.0) >= h_bound - 1e-12


def test_randomized_regime_dichotomy(rng):
    # light version of the acceptance grid: 4 triples per regime
    for ratio_lo, ratio_hi, regime in ((0.2, 0.8, "sub"), (1.25, 5.0, "super")):
        for _ in range(4):
            alpha = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
            mu = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
            ratio = float(np.exp(rng.uniform(np.log(ratio_lo), np.log(ratio_hi))))
            p = make_params(2 * alpha * ratio, alpha, mu)
            rep = regime_report(p, "x")
            assert rep.regime == regime
            assert rep.match, rep.to_json()


def test_expected_type_sets_pinned():
    assert expected_types("sub", "x") == {"1_inf", "inf_inf", "inf_1",
                                          "periodic", "qs-_qs+"}
    assert expected_types("critical", "x") == {"1_inf", "inf_inf", "inf_1",
                                               "periodic", "1_qs+", "qs-_1"}
    assert expected_types("super", "x") == {"1_inf", "inf_inf", "inf_1",
                                            "periodic", "1_1", "inf_qs+",
                                            "qs-_inf"}
    base_tau = {"1_inf", "inf_1", "inf_inf", "-inf_-1/k", "-1/k_-inf",
                "-inf_-inf"}
    assert expected_types("sub", "tau") == base_tau | {"-1/k_-1/k", "-inf_1",
                                                       "1_-inf"}
    assert expected_types("critical", "tau") == base_tau | {"-1/k_1", "1_-1/k"}
    assert expected_types("super", "tau") == base_tau | {"1_1", "-1/k_inf",
                                                         "inf_-1/k"}


class TestOrbitMirrorReclassification:
    """Reversal (u,v)->(u,-v) with time flipped maps every computed orbit to
    another orbit of the system; its endpoints swap and relabel accordingly."""

    def test_mirrored_samples_satisfy_field(self, p_sub, rng):
        from pldisk.model import field_tau

        orbit = shoot_saddle(p_sub, "E1", "unstable_plus")
        seg = orbit.segments[0]
        for i in rng.integers(0, len(seg.t), 10):
            u, v = seg.y[i]
            f1, f2 = field_tau(p_sub, (u, -v))
            # d/d(-tau) of (u, -v) equals the field there
            assert f1 == -seg.f[i, 0]
            assert f2 == pytest.approx(seg.f[i, 1], rel=1e-15, abs=1e-305)

    def test_edge_types_pair_under_reversal(self, graphs):
        swap = {"1": "1", "qs-": "qs+", "qs+": "qs-", "inf": "inf"}
        for g in graphs.values():
            rep = regime_report(g.params, "x", graph=g)
            for (a, b), name in rep.edge_types.items():
                left, _, right = name.partition("_")
                mirrored_key = (_REVERSAL_MAP[b], _REVERSAL_MAP[a])
                expect = f"{swap[right]}_{swap[left]}"
                assert rep.edge_types[mirrored_key] == expect, (a, b, name)
