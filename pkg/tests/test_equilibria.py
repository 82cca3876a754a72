import math

import numpy as np
import pytest

from conftest import random_params
from pldisk.equilibria import (Stability, all_equilibria, eigen2,
                               equilibrium_by_id, finite_equilibria,
                               jacobian_field, numerical_jacobian)
from pldisk.errors import InvalidBranchError
from pldisk.model import field_tau


def _sorted_eigs(vals):
    return sorted((complex(v) for v in vals), key=lambda z: (z.real, z.imag))


class TestFiniteEquilibria:
    def test_reference_values(self, p_sub):
        eqs = {e.id: e for e in finite_equilibria(p_sub)}
        assert eqs["E2"].location == (-0.5, 0.0)
        lams = _sorted_eigs(eqs["E2"].eigenvalues)
        assert lams[1].real == pytest.approx(math.sqrt(1.5), abs=1e-14)
        lams0 = _sorted_eigs(eqs["E0"].eigenvalues)
        assert lams0[0] == pytest.approx(-1j, abs=1e-14)
        assert lams0[1] == pytest.approx(1j, abs=1e-14)
        assert eqs["E0"].stability is Stability.CENTER
        assert eqs["E1"].stability is Stability.SADDLE
        assert eqs["E2"].stability is Stability.SADDLE

    def test_critical_eigenvalue_coincidence(self, p_crit):
        eqs = {e.id: e for e in finite_equilibria(p_crit)}
        for eid in ("E1", "E2"):
            mags = sorted(abs(v) for v in eqs[eid].eigenvalues)
            assert mags == pytest.approx([2.0, 2.0], abs=1e-12)

    def test_traces_vanish(self, rng):
        for p in random_params(rng, 10):
            for eq in finite_equilibria(p):
                (a, b), (c, d) = eq.jacobian
                assert a + d == 0.0

    def test_saddles_have_real_opposite_eigenvalues(self, rng):
        for p in random_params(rng, 15):
            for eq in finite_equilibria(p):
                if eq.id == "E0":
                    continue
                l0, l1 = eq.eigenvalues
                assert l0.imag == 0.0 and l1.imag == 0.0
                assert l0.real * l1.real < 0.0


class TestAllEquilibria:
    def test_count_and_reference_jacobians(self, p_sub):
        eqs = {e.id: e for e in all_equilibria(p_sub)}
        assert len(eqs) == 11
        assert eqs["E4"].jacobian == ((-1.0, 0.0), (-1.0, -4.0))
        assert _sorted_eigs(eqs["E4"].eigenvalues) == [(-4 + 0j), (-1 + 0j)]
        assert _sorted_eigs(eqs["E8"].eigenvalues) == [(-4 + 0j), (-1 + 0j)]

    def test_infinity_stability_parameter_independent(self, rng):
        repelling = {"E3", "E5", "E7", "E9"}
        attracting = {"E4", "E6", "E8", "E10"}
        for p in random_params(rng, 15):
            eqs = [e for e in all_equilibria(p) if e.frame != "interior"]
            assert len(eqs) == 8
            for eq in eqs:
                if eq.id in repelling:
                    assert eq.stability is Stability.UNSTABLE_NODE
                    assert all(v.real > 0 for v in eq.eigenvalues)
                else:
                    assert eq.id in attracting
                    assert eq.stability is Stability.STABLE_NODE
                    assert all(v.real < 0 for v in eq.eigenvalues)

    def test_horizontal_eigenvalue_family(self, rng):
        for p in random_params(rng, 10):
            s = p.sqrt_alpha_mu
            eqs = {e.id: e for e in all_equilibria(p)}
            mags = sorted(abs(v) for v in eqs["E3"].eigenvalues)
            assert mags == pytest.approx([s, 4 * s], rel=1e-13)
            m3 = p.vertical_chart_level ** 3
            mags = sorted(abs(v) for v in eqs["E7"].eigenvalues)
            assert mags == pytest.approx([p.alpha * p.mu * m3,
                                          4 * p.alpha * p.mu * m3], rel=1e-13)


class TestEigen2:
    def test_companion_example(self):
        pairs = eigen2(((0.0, 1.0), (3.0, 0.0)))
        vals = _sorted_eigs(p.value for p in pairs)
        assert vals[0].real == pytest.approx(-math.sqrt(3.0), abs=1e-14)
        assert vals[1].real == pytest.approx(math.sqrt(3.0), abs=1e-14)
        for ep in pairs:
            lam = ep.value.real
            vec = [c.real for c in ep.vector]
            assert vec[0] == pytest.approx(1.0)
            assert vec[1] == pytest.approx(lam, abs=1e-14)

    def test_rotation_generator(self):
        pairs = eigen2(((0.0, 1.0), (-1.0, 0.0)))
        vals = _sorted_eigs(p.value for p in pairs)
        assert vals == [complex(0, -1), complex(0, 1)]

    def test_identity_repeated(self):
        pairs = eigen2(((1.0, 0.0), (0.0, 1.0)))
        assert all(p.value == 1.0 and p.repeated for p in pairs)

    def test_eigenvector_pairing_is_algebraic(self, rng):
        # J (1, lam)^T = lam (1, lam)^T for companion matrices
        for _ in range(10):
            c = float(rng.uniform(0.5, 6.0))
            m = np.array([[0.0, 1.0], [c, 0.0]])
            for ep in eigen2(m):
                vec = np.array([z.real for z in ep.vector])
                assert np.allclose(m @ vec, ep.value.real * vec, atol=1e-12)

    def test_against_lapack_oracle(self, rng):
        for _ in range(40):
            m = rng.uniform(-3, 3, (2, 2))
            ours = _sorted_eigs(p.value for p in eigen2(m))
            ref = _sorted_eigs(np.linalg.eigvals(m))
            for a, b in zip(ours, ref):
                assert a == pytest.approx(b, abs=1e-10)


class TestNumericalJacobian:
    def test_reference_matrices(self, p_sub):
        J = numerical_jacobian(lambda x: field_tau(p_sub, x), (1.0, 0.0))
        assert np.allclose(J, [[0, 1], [3, 0]], atol=1e-7)
        J = numerical_jacobian(lambda x: field_tau(p_sub, x), (0.0, 0.0))
        assert np.allclose(J, [[0, 1], [-1, 0]], atol=1e-7)
        eq4 = equilibrium_by_id(p_sub, "E4")
        J = numerical_jacobian(jacobian_field(p_sub, eq4), eq4.location)
        assert np.allclose(J, [[-1, 0], [-1, -4]], atol=1e-7)

    def test_closed_forms_match_numerics(self, rng):
        for p in random_params(rng, 8):
            for eq in all_equilibria(p):
                J = numerical_jacobian(jacobian_field(p, eq), eq.location)
                ours = _sorted_eigs(eq.eigenvalues)
                ref = _sorted_eigs(np.linalg.eigvals(J))
                for a, b in zip(ours, ref):
                    assert abs(a - b) <= 1e-6


class TestBranchDirections:
    def test_invalid_branch_errors(self, p_sub):
        with pytest.raises(InvalidBranchError):
            equilibrium_by_id(p_sub, "E3").branch_direction("stable_plus")
        with pytest.raises(InvalidBranchError):
            equilibrium_by_id(p_sub, "E4").branch_direction("unstable_plus")
        with pytest.raises(InvalidBranchError):
            equilibrium_by_id(p_sub, "E0").branch_direction("unstable_plus")

    def test_saddle_branches_follow_eigenvectors(self, p_sub):
        eq = equilibrium_by_id(p_sub, "E1")
        vec, tdir = eq.branch_direction("unstable_plus")
        w = math.sqrt(3.0)
        expect = np.array([1.0, w]) / math.hypot(1.0, w)
        assert np.allclose(vec, expect, atol=1e-12)
        assert tdir == "forward"
        vec, tdir = eq.branch_direction("stable_minus")
        expect = -np.array([1.0, -w]) / math.hypot(1.0, w)
        assert np.allclose(vec, expect, atol=1e-12)
        assert tdir == "backward"
