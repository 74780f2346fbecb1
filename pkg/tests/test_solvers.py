from fractions import Fraction as Fr

import mpmath
import pytest

from hamforge import solvers
from hamforge.expcalc import mpf
from hamforge.polycore import total_degree
from hamforge.profiles import AnsatzConfig, ConfigError
from hamforge.solvers import InfeasibleError

from conftest import cy_config, rank3_config, shrinker_config


def test_bisect_exact():
    f = lambda x: x * x - 2
    x, fx, it = solvers.bisect(f, Fr(1), Fr(2), xtol=Fr(1, 2 ** 40))
    assert abs(x - Fr(14142135623731, 10 ** 13)) < Fr(1, 10 ** 11)


def test_cp1_closed_form(cp1_model):
    assert cp1_model.alphas == (-1, 1)
    assert cp1_model.deltas == [-1, -1]
    assert cp1_model.a == 0


def test_type2_rank2_alpha_formula():
    # α = (d₁+1)m₁/m₂ with α₁ = −1
    cfg = AnsatzConfig("type2", "cy", 1, 4, (0, 0), (3, 1))
    m = solvers.solve(cfg)
    assert m.alphas == (-1, 3)
    assert m.deltas == [-3, -1]


def test_cy_bracket_and_root(cy_model):
    cfg = cy_config()
    assert solvers.type1_delta1(Fr(3, 2), cfg) == Fr(129, 65)
    assert solvers.type1_delta1(Fr(2), cfg) == Fr(34, 15)
    al = cy_model.alphas[1]
    assert Fr(3, 2) < al < 2
    assert abs(cy_model.deltas[0] - 2) <= Fr(1, 10 ** 10)
    # frozen root: brentq on δ₁(α) = (4(α³−1)/(α⁴−1) − 3)·α/(1−α) gives 1.5213797068045665
    assert abs(float(al) - 1.52137970680457) < 1e-12


def test_cy_out_of_range():
    cfg = AnsatzConfig("type1", "cy", 2, 3, (0, 0), (3, 0))
    with pytest.raises(InfeasibleError):
        solvers.solve(cfg)


def test_steady_beta(steady_models):
    for a, m in steady_models.items():
        assert m.beta == 1
        assert m.delta_residual() < 1e-10
        assert m.growth["volume"] == 4


def test_shrinker(shrinker_model):
    m = shrinker_model
    assert m.a < 0
    assert abs(m.info["H"]) <= 1e-10
    assert m.delta_residual() <= 1e-8
    assert abs(float(m.a) - -1.43842791352429) < 1e-10
    assert abs(float(m.info["alpha"]) - 1.22019367118543) < 1e-10


def test_shrinker_range_report():
    cfg = AnsatzConfig("type1", "shrinking", 3, 4, (0, 0), (1, 2))
    with pytest.raises(InfeasibleError) as exc:
        solvers.solve(cfg)
    assert exc.value.report["range"] == (Fr(3, 2), Fr(3))


def test_expander(expander_model):
    m = expander_model
    assert m.delta_residual() <= 1e-8
    assert abs(float(m.info["alpha"]) - 1.27655350835305) < 1e-10
    assert m.certify().passed


@pytest.mark.parametrize("a", [0, 1])
def test_type2_rank3(a):
    m = solvers.solve_type2_rank3(rank3_config(a), a)
    assert m.delta_residual() <= 1e-8
    td = total_degree(m.q, m.roots)
    s = sum((d + 1) * x for d, x in zip(m.config.d_js, m.deltas))
    assert abs(s - td.closed_form) <= 1e-8
    assert m.alphas[1] == -1


def test_no_rank3_type1_without_flag():
    cfg = AnsatzConfig("type1", "cy", 2, 6, (0, 0, 0), (3, 2, 1))
    with pytest.raises(ConfigError):
        solvers.solve(cfg)


def test_experimental_general_rank3():
    cfg = AnsatzConfig("type1", "cy", 2, 6, (0, 0, 0), (3, 2, 1), experimental=True)
    m = solvers.solve(cfg)
    assert m.info["unproved_regime"]
    assert m.delta_residual() <= 1e-8


def test_model_invariants(cy_model):
    m = cy_model
    assert len(m.v_basis) == m.ell
    assert mpmath.isfinite(mpf(m.beta))


def test_type2_rank2_with_multiplicity():
    # d = (2, 0), m = (1, 1): α = (d₁+1)m₁/m₂ = 3
    cfg = AnsatzConfig("type2", "cy", 1, 4, (2, 0), (1, 1))
    m = solvers.solve(cfg)
    assert m.alphas == (-1, 3)
    assert m.deltas == [-1, -1]


def test_steady_to_cy_continuity(cy_model):
    # α*(a) − α*(0) is linear in a with slope ≈ −0.1586
    from conftest import steady_config
    diffs = {}
    for a in (Fr(1, 10 ** 4), Fr(1, 10 ** 5)):
        diffs[a] = solvers.solve(steady_config(a)).alphas[1] - cy_model.alphas[1]
    slopes = [float(d / a) for a, d in diffs.items()]
    assert slopes == pytest.approx([-0.15864] * 2, rel=1e-3)


def test_shrinker_H_negative_near_zero():
    cfg = shrinker_config()
    vals = [solvers.shrinker_H(mpf("1.22"), mpf(a), cfg) for a in ("-1e-2", "-1e-3", "-1e-4")]
    assert all(v < 0 for v in vals)
    # H_R = O(1/|a|)
    assert abs(vals[2] / vals[1] - 10) < 0.1
