import json
import math

import numpy as np
import pytest

from conftest import random_params
from pldisk.errors import ParameterDomainError, SingularLineError
from pldisk.model import (ModelParams, PhasePoint, SymmetryKind,
                          appendix_b_params, conserved_H, field_tau, field_x,
                          make_params, potential_U, quasi_homogeneity_check,
                          symmetry_apply, time_rescale_factor)


class TestMakeParams:
    def test_reference_derived_constants(self):
        p = make_params(1, 1, 1)
        assert p.omega_plus == pytest.approx(math.sqrt(3.0), abs=1e-12)
        assert p.Lambda_plus == pytest.approx(math.sqrt(1.5), abs=1e-12)
        assert p.u_singular == -0.5
        assert p.sqrt_alpha_mu == 1.0
        assert p.M == 1.0

    def test_critical_coincidence(self):
        p = make_params(2, 1, 1)
        assert p.omega_plus == pytest.approx(2.0, abs=1e-14)
        assert p.Lambda_plus == pytest.approx(2.0, abs=1e-14)
        # algebraic identity at D = 2*alpha, up to rounding
        assert abs(p.Lambda_plus - p.omega_plus) <= 8 * np.finfo(float).eps * p.omega_plus

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, 0),
                                     (float("nan"), 1, 1), (float("inf"), 1, 1)])
    def test_rejects_nonpositive_or_nonfinite(self, bad):
        with pytest.raises(ParameterDomainError):
            make_params(*bad)

    def test_json_round_trip(self):
        p = make_params(1.5, 0.75, 2.0)
        q = ModelParams.from_json(json.dumps(p.to_json()))
        assert (q.D, q.alpha, q.mu) == (1.5, 0.75, 2.0)

    def test_json_rejects_unknown_keys(self):
        with pytest.raises(ParameterDomainError):
            ModelParams.from_json({"D": 1, "alpha": 1, "mu": 1, "gamma": 2})


class TestFields:
    def test_field_x_examples(self, p_sub):
        assert field_x(p_sub, (0.0, 0.0)) == (0.0, 0.0)
        f = field_x(p_sub, (1.0, 3.0))
        assert f == pytest.approx((1.0, 0.0), abs=1e-15)

    def test_field_x_singular_line(self, p_sub):
        with pytest.raises(SingularLineError):
            field_x(p_sub, (-0.5, 1.0))

    def test_field_tau_examples(self, p_sub):
        assert field_tau(p_sub, (1.0, 0.0)) == (0.0, 0.0)
        assert field_tau(p_sub, (-0.5, 0.0)) == (0.0, 0.0)
        assert field_tau(p_sub, (2.0, 1.0)) == pytest.approx((1.0, 10.0), abs=1e-14)

    def test_time_rescale_examples(self, p_sub):
        assert time_rescale_factor(p_sub, 1.0) == 3.0
        assert time_rescale_factor(p_sub, -0.5) == 0.0
        assert time_rescale_factor(make_params(2, 1, 3), 0.0) == 2.0

    def test_parallel_off_singular_line(self, rng):
        for p in random_params(rng, 10):
            for _ in range(5):
                u = rng.uniform(p.u_singular + 0.2, 2.0)
                v = rng.uniform(-2.0, 2.0)
                w = time_rescale_factor(p, u)
                fx = field_x(p, (u, v))
                ft = field_tau(p, (u, v))
                assert ft[0] == pytest.approx(w * fx[0], rel=1e-13, abs=1e-13)
                assert ft[1] == pytest.approx(w * fx[1], rel=1e-13, abs=1e-13)


class TestConservedQuantity:
    def test_reference_values(self, p_sub):
        assert conserved_H(p_sub, (0.0, 0.0)) == 0.0
        assert conserved_H(p_sub, (1.0, 0.0)) == pytest.approx(-1.0 / 3.0, abs=1e-15)
        assert conserved_H(p_sub, (-0.5, 0.0)) == pytest.approx(-5.0 / 96.0, abs=1e-15)

    def test_saddle_levels_closed_forms(self, rng):
        # independent closed forms from expanding H at the two saddles
        for p in random_params(rng, 20):
            h1 = conserved_H(p, (1.0, 0.0))
            assert h1 == pytest.approx(-p.mu * (p.alpha + p.D) / 6.0, rel=1e-13)
            h2 = conserved_H(p, (p.u_singular, 0.0))
            expect = -p.mu * p.D ** 3 * (p.D + 4 * p.alpha) / (96 * p.alpha ** 3)
            assert h2 == pytest.approx(expect, rel=1e-12)

    def test_gradient_annihilates_field(self, rng):
        # dH/dtau = H_u*u' + H_v*v' must vanish identically; the gradient is
        # differentiated by hand from the quartic, independent of the field.
        for p in random_params(rng, 10):
            for _ in range(5):
                u, v = rng.uniform(-2, 2), rng.uniform(-3, 3)
                hu = (2 * p.alpha * p.mu * u ** 3
                      + (p.mu * p.D - 2 * p.alpha * p.mu) * u ** 2 - p.mu * p.D * u)
                hv = -v
                f1, f2 = field_tau(p, (u, v))
                scale = 1.0 + abs(hu * f1) + abs(hv * f2)
                assert abs(hu * f1 + hv * f2) / scale < 1e-13

    def test_level_gap_vanishes_iff_critical(self, rng):
        for _ in range(10):
            alpha = float(rng.uniform(0.3, 3.0))
            mu = float(rng.uniform(0.3, 3.0))
            p = make_params(2 * alpha, alpha, mu)
            gap = conserved_H(p, (1, 0)) - conserved_H(p, (p.u_singular, 0))
            assert abs(gap) < 1e-14 * (1 + p.mu)
            off = make_params(2 * alpha * 1.3, alpha, mu)
            gap_off = conserved_H(off, (1, 0)) - conserved_H(off, (off.u_singular, 0))
            # factored closed form of the gap, derived independently
            expect = mu * (off.D - 2 * alpha) * (off.D + 2 * alpha) ** 3 / (96 * alpha ** 3)
            assert gap_off == pytest.approx(expect, rel=1e-12)
            assert gap_off != 0.0


class TestSymmetries:
    def test_apply_examples(self):
        assert symmetry_apply(SymmetryKind.REVERSAL, (2, 3)) == PhasePoint(2, -3)
        assert symmetry_apply(SymmetryKind.MIRROR, (2, 3)) == PhasePoint(-2, 3)
        twice = symmetry_apply(SymmetryKind.REVERSAL,
                               symmetry_apply(SymmetryKind.REVERSAL, (0.7, -1.2)))
        assert twice == PhasePoint(0.7, -1.2)

    def test_reversal_equivariance_all_params(self, rng):
        # f(u,-v) = (-f1, f2)(u,v) holds for every parameter triple
        for p in random_params(rng, 15):
            u, v = rng.uniform(-2, 2), rng.uniform(-3, 3)
            f = field_tau(p, (u, v))
            fr = field_tau(p, (u, -v))
            assert fr[0] == -f[0]
            assert fr[1] == f[1]

    def test_mirror_equivariance_iff_critical(self, rng):
        for _ in range(8):
            alpha = float(rng.uniform(0.3, 3.0))
            mu = float(rng.uniform(0.3, 3.0))
            pc = make_params(2 * alpha, alpha, mu)
            f = field_tau(pc, (1.0, 1.0))
            fm = field_tau(pc, (-1.0, 1.0))
            assert fm[0] == pytest.approx(f[0], abs=1e-14)
            assert fm[1] == pytest.approx(-f[1], abs=1e-12 * (1 + abs(f[1])))
        p = make_params(1, 1, 1)
        f = field_tau(p, (1.0, 1.0))
        fm = field_tau(p, (-1.0, 1.0))
        assert abs(fm[1] + f[1]) > 0.1  # residual is O(1) off the critical case


class TestQuasiHomogeneity:
    def test_residual_examples(self, p_sub):
        rep = quasi_homogeneity_check(p_sub, (1.0, 0.0), (10.0, 100.0))
        assert rep.type_exponents == (1, 2)
        assert rep.order == 2
        r10 = rep.residuals[0]
        assert r10[2] == pytest.approx(-0.11, abs=1e-12)
        r100 = rep.residuals[1]
        assert r100[2] == pytest.approx(-0.0101, abs=1e-12)

    def test_first_component_exact(self, rng):
        for p in random_params(rng, 5):
            rep = quasi_homogeneity_check(p, (0.0, 1.0))
            assert all(r[1] == 0.0 for r in rep.residuals)

    def test_decay_and_slope(self, rng):
        for p in random_params(rng, 8):
            rep = quasi_homogeneity_check(p, (1.0, 1.0))
            assert rep.decays
            slope = rep.log_slope()
            if abs(2 * p.alpha - p.D) > 0.5:
                # generic parameters: first-order decay
                assert slope == pytest.approx(-1.0, abs=0.1)
            else:
                # near the critical line the leading term weakens toward -2
                assert -2.1 <= slope <= -0.9

    def test_ladder_validation(self, p_sub):
        with pytest.raises(ValueError):
            quasi_homogeneity_check(p_sub, (0.0, 0.0))
        with pytest.raises(ValueError):
            quasi_homogeneity_check(p_sub, (1.0, 0.0), (0.5, 10.0))
        with pytest.raises(ValueError):
            quasi_homogeneity_check(p_sub, (1.0, 0.0), (10.0, 10.0))


class TestSecondaryParameterization:
    def test_examples(self):
        assert appendix_b_params(make_params(1, 1, 1)) == (1.0, 2.0)
        assert appendix_b_params(make_params(2, 1, 1)) == (2.0, 1.0)
        mt, k = appendix_b_params(make_params(4, 1, 3))
        assert (mt, k) == (12.0, 0.5)

    def test_alternate_field_agrees(self, rng):
        # -mu*u*(1-u)*(D+2*alpha*u) == -mu_tilde*u*(1-u)*(1+k*u)
        for p in random_params(rng, 10):
            mt, k = appendix_b_params(p)
            u = float(rng.uniform(-2, 2))
            lhs = field_tau(p, (u, 0.3))[1]
            rhs = -mt * u * (1 - u) * (1 + k * u)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_potential_matches_axis_H(rng):
    for p in random_params(rng, 10):
        u = float(rng.uniform(-2, 2))
        assert potential_U(p, u) == conserved_H(p, (u, 0.0))
