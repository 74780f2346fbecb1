from fractions import Fraction as Fr

import mpmath
import pytest
import sympy as sp

from hamforge.expcalc import mpf
from hamforge.polycore import TYPE1, TYPE2, Poly, RootTuple, partial_degree
from hamforge.profiles import (AnsatzConfig, ConfigError, ObstructionError, build_profiles, build_q,
                               build_q_hermite, certify_profiles, check_alternation)

from conftest import cp1_config, cy_config


def sympy_cy_q1(alpha):
    """q = q₁t − 3 from ∫_1^α t²q(t)dt = 0 (independent symbolic oracle)."""
    t, q1 = sp.symbols("t q1")
    sol = sp.solve(sp.integrate(t ** 2 * (q1 * t - 3), (t, 1, alpha)), q1)[0]
    return Fr(int(sp.numer(sol)), int(sp.denom(sol)))


class TestConfig:
    def test_conventions(self):
        cfg = cy_config()
        assert cfg.eps_B == 1 and cfg.delta_targets == (2, 1) and cfg.q0 == -3
        cfg2 = cp1_config()
        assert cfg2.eps_B == -1 and cfg2.delta_targets == (-1, -1) and cfg2.q0 == 2

    def test_type2_shrinker_obstructed(self):
        with pytest.raises(ObstructionError):
            AnsatzConfig("type2", "shrinking", 1, 4, (0, 0), (1, 1))

    @pytest.mark.parametrize("args", [
        ("type1", "cy", 2, 3, (0, 0), (2, 2)),          # Σ m ≠ i_B
        ("type1", "steady", 2, 3, (0, 0), (2, 1), 0),   # steady needs a > 0
        ("type1", "cy", 2, 3, (0,), (2, 1)),            # length mismatch
        ("type3", "cy", 2, 3, (0, 0), (2, 1)),
    ])
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            AnsatzConfig(*args)


class TestQ:
    @pytest.mark.parametrize("alpha", [Fr(3, 2), Fr(2), Fr(7, 3)])
    def test_cy_q_matches_symbolic(self, alpha):
        r = RootTuple((1, alpha), TYPE1)
        q = build_q(r, cy_config())
        assert q == Poly([-3, sympy_cy_q1(alpha)])

    def test_hermite_route_agrees(self):
        r = RootTuple((1, Fr(2)), TYPE1)
        assert build_q_hermite(r, cy_config()) == build_q(r, cy_config())

    def test_alternation(self):
        r = RootTuple((1, Fr(2)), TYPE1)
        ok, vals = check_alternation(build_q(r, cy_config()), r)
        assert ok and vals == [Fr(-17, 15), Fr(11, 15)]


class TestCP1:
    def setup_method(self):
        self.cfg = cp1_config()
        self.roots = RootTuple((-1, 1), TYPE2)
        self.q = build_q(self.roots, self.cfg)
        self.ps = build_profiles(self.q, self.roots, self.cfg)

    def test_profile_closed_form(self):
        # F = 2t − 2/t on both intervals
        for j in range(2):
            for t in (Fr(-3), Fr(-2), Fr(1, 2), Fr(5)):
                if (j == 0) == (t < 0):
                    assert self.ps.F(j, t) == 2 * t - 2 / t

    def test_boundary_values(self):
        assert self.q(-1) == self.q(1) == 2
        for j, k in ((0, 0), (1, 1)):
            theta0, dtheta, _ = self.ps.boundary_values(j, k)
            assert theta0 == 0
            assert dtheta == 4 == 2 * self.q(self.roots.alphas[k])

    def test_certification(self):
        assert certify_profiles(self.ps, self.cfg).passed
        assert self.ps.beta == 1


class TestCY:
    def test_theta_derivative_at_root(self):
        # Θ′(α_k) = 2q(α_k) against a central difference
        r = RootTuple((1, Fr(3, 2)), TYPE1)
        cfg = cy_config()
        ps = build_profiles(build_q(r, cfg), r, cfg)
        for k, x in enumerate(r.alphas):
            h = mpf(10) ** -12
            j = 0 if k == 0 else 1
            fd = (ps.theta(j, mpf(x) + h) - ps.theta(j, mpf(x) - h)) / (2 * h)
            assert abs(fd - 2 * ps.q(x)) < 1e-8

    def test_frozen_delta(self):
        r = RootTuple((1, Fr(3, 2)), TYPE1)
        assert partial_degree(build_q(r, cy_config()), r, 0) == Fr(129, 65)

    def test_report_check_order(self):
        r = RootTuple((1, Fr(11, 10)), TYPE1)
        cfg = cy_config()
        rep = certify_profiles(build_profiles(build_q(r, cfg), r, cfg), cfg)
        assert [c.name for c in rep.checks][:2] == ["q_sign_alternation", "positivity"]


def test_shrinker_q1_limit():
    # q₁(a) tends to the a = 0 moment ratio as a → 0⁻
    from conftest import shrinker_config
    r = RootTuple((Fr(1, 2), Fr(2)), TYPE1)
    cfg = shrinker_config()
    q0 = mpf(build_q(r, cfg, 0).coeff(1))
    errs = [abs(mpf(build_q(r, cfg, mpf(a)).coeff(1)) - q0) for a in ("-1e-3", "-1e-5")]
    assert errs[1] < errs[0] / 50 and errs[1] < 1e-5
