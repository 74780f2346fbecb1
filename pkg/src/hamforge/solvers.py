"""Parameter solves δ_j(q(α, a), α) = (−1)^ℓ ε_B m_j for each case.

Normalizations: α₁ = 1 (Type 1), α_{ℓ−1} = −1 (Type 2). CY Type 1 solves
run in exact rational arithmetic (dyadic bisection), so the resulting model
is exact; the other cases work in mpmath at the ambient precision.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import expcalc
from .expcalc import mpf
from .polycore import (TYPE1, TYPE2, Poly, RootTuple, elem_symmetric_hat, partial_degree,
                       total_degree, vandermonde_delta)
from .profiles import (CY, EXPANDING, SHRINKING, STEADY, AnsatzConfig, ConfigError, ProfileSet,
                       build_profiles, build_q, certify_profiles)

log = logging.getLogger(__name__)

SOLVE_TOL = 1e-10
SHRINK_OUTER_TOL = 1e-8
H_TOL = 1e-10


class InfeasibleError(ValueError):
    """Targets outside the range reachable by the family."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report or {}


class SolverError(ArithmeticError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


@dataclass
class SolitonModel:
    """A fully solved model; see :func:`assemble_model`."""

    config: AnsatzConfig
    roots: RootTuple
    a: object
    q: Poly
    profiles: ProfileSet
    deltas: list
    v_basis: list
    K_ell_coeffs: list
    K1_coeffs: list
    beta: object
    growth: dict
    info: dict = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return self.roots.ell

    @property
    def alphas(self) -> tuple:
        return self.roots.alphas

    def delta_residual(self):
        t = self.config.delta_targets
        return max(abs(mpf(d) - t_j) for d, t_j in zip(self.deltas, t))

    def certify(self):
        return certify_profiles(self.profiles, self.config)


def v_basis(q: Poly, roots: RootTuple) -> list:
    """v_j = ((d_j+1)/q(α_j)) · ((−1)^{r−1} α_j^{ℓ−r})_{r=1..ℓ}."""
    al = roots.alphas
    ell = roots.ell
    out = []
    for j, x in enumerate(al):
        s = (roots.d_js[j] + 1) / q(x)
        out.append([s * (-1) ** (r - 1) * x ** (ell - r) for r in range(1, ell + 1)])
    return out


def K_coeffs(q: Poly, roots: RootTuple, s: int) -> list:
    """Coefficients of K_s in the X_j basis: q(α_j) σ_{s−1}(α̂_j) / ((d_j+1) Δ(α_j))."""
    al = roots.alphas
    return [q(al[j]) * elem_symmetric_hat(al, s - 1, j) / ((roots.d_js[j] + 1) * vandermonde_delta(al, j))
            for j in range(roots.ell)]


def growth_exponents(config: AnsatzConfig, beta) -> dict:
    ell = config.ell
    n = config.n
    if not mpmath.isfinite(beta) or beta >= ell + 1:
        return {"distance": None, "volume": None, "n": n}
    gap = ell + 1 - beta
    vol = Fraction(2 * n) / gap if config.case == TYPE1 else Fraction(4 * n - 2) / gap
    return {"distance": Fraction(gap, 2) if isinstance(gap, int) else gap / 2, "volume": vol, "n": n}


def assemble_model(config: AnsatzConfig, roots: RootTuple, a=None, info=None, q=None) -> SolitonModel:
    a = config.a if a is None else a
    q = build_q(roots, config, a) if q is None else q
    ps = build_profiles(q, roots, config, a)
    deltas = [partial_degree(q, roots, j) for j in range(roots.ell)]
    beta = ps.beta
    if isinstance(beta, int):
        beta = int(beta)
    return SolitonModel(config.with_a(a), roots, a, q, ps, deltas, v_basis(q, roots),
                        K_coeffs(q, roots, roots.ell), K_coeffs(q, roots, 1), beta,
                        growth_exponents(config, beta), dict(info or {}))


# root finding helpers

def bisect(f, lo, hi, ftol=0.0, xtol=None, maxiter=400):
    """Bisection on a sign change of f; works for Fractions and mpf.

    Stops when |f(mid)| ≤ ftol and the bracket is narrower than xtol (both
    conditions), or after maxiter halvings.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo, flo, 0
    if fhi == 0:
        return hi, fhi, 0
    if (flo > 0) == (fhi > 0):
        raise SolverError(f"no sign change on [{lo}, {hi}]")
    xtol = xtol if xtol is not None else 0
    it = 0
    while True:
        mid = (lo + hi) / 2
        fm = f(mid)
        it += 1
        if fm == 0 or (abs(fm) <= ftol and abs(hi - lo) <= xtol) or it >= maxiter:
            return mid, fm, it
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm


def scan_brackets(f, grid):
    """All adjacent grid pairs where f changes sign, with the sampled table."""
    vals = [f(x) for x in grid]
    br = [(grid[i], grid[i + 1]) for i in range(len(grid) - 1)
          if vals[i] != 0 and (vals[i] > 0) != (vals[i + 1] > 0)]
    return br, list(zip(grid, vals))


# Type 2 rank 2

def solve_type2_rank2(config: AnsatzConfig) -> SolitonModel:
    """Closed form α₁ = −1, α₂ = (d₁+1) m₁ / m₂.

    For d₁ = 0 this is α = m₁/(i_B − m₁); the general form follows from
    δ₁ = −m₁ with δ₂ = −i_B/(α+1).
    """
    if config.case != TYPE2 or config.ell != 2:
        raise ConfigError("solve_type2_rank2 needs Type 2, ℓ = 2")
    m1, m2 = config.m_js
    d1 = config.d_js[0]
    if m1 <= 0 or m2 <= 0:
        raise InfeasibleError(f"need m₁, m₂ > 0 (got {config.m_js}); degenerate when i_B = (d₁+1)m₁",
                              {"m": config.m_js})
    alpha = Fraction((d1 + 1) * m1, m2)
    roots = RootTuple((Fraction(-1), alpha), TYPE2, config.d_js)
    model = assemble_model(config, roots, config.a, {"method": "closed form", "alpha": alpha})
    _check_targets(model, 0)
    return model


def _check_targets(model: SolitonModel, tol) -> None:
    res = model.delta_residual()
    model.info["delta_residual"] = res
    td = total_degree(model.q, model.roots, tol=1e-20)
    model.info["total_degree"] = td.direct
    model.info["total_degree_displayed_form"] = td.displayed_form
    if res > tol:
        raise SolverError(f"δ residual {res} exceeds {tol}")


# Type 1 rank 2, CY and steady

def type1_delta1(alpha, config: AnsatzConfig, a=None):
    """δ₁ for α₁ = 1, α₂ = alpha."""
    a = config.a if a is None else a
    roots = RootTuple((1 if isinstance(alpha, Fraction) else mpf(1), alpha), TYPE1, config.d_js)
    q = build_q(roots, config, a)
    return partial_degree(q, roots, 0)


def type1_range(config: AnsatzConfig) -> tuple:
    d1, d2 = config.d_js
    return Fraction(config.i_B, d1 + d2 + 2), Fraction(config.i_B, d1 + 1)


def _alpha_grid(exact: bool, per_decade=8):
    # 1 + 10^s for s in [-6, 6]; rounded to 6 digits in the exact case
    pts = []
    smin, smax = -6, 6
    for i in range((smax - smin) * per_decade + 1):
        s = smin + Fraction(i, per_decade)
        if exact:
            v = Fraction(mpmath.nstr(mpmath.power(10, mpf(s)), 6, strip_zeros=True))
        else:
            v = mpmath.power(10, mpf(s))
        pts.append(1 + v)
    return pts


def solve_type1_rank2(config: AnsatzConfig, a=None) -> SolitonModel:
    a = config.a if a is None else a
    if config.case != TYPE1 or config.ell != 2:
        raise ConfigError("needs Type 1, ℓ = 2")
    m1, m2 = config.m_js
    if not m1 > m2 > 0:
        raise InfeasibleError(f"Type 1 rank 2 needs m₁ > m₂ > 0, got {config.m_js}",
                              {"m": config.m_js})
    lo_r, hi_r = type1_range(config)
    exact = a == 0
    if exact and not lo_r < m1 < hi_r:
        raise InfeasibleError(f"m₁ = {m1} outside the open range ({lo_r}, {hi_r})",
                              {"range": (lo_r, hi_r), "m1": m1})
    target = config.delta_targets[0]
    f = lambda al: type1_delta1(al, config, a) - target
    grid = _alpha_grid(exact)
    br, table = scan_brackets(f, grid)
    if not br:
        if not exact and not lo_r < m1 < hi_r:
            raise InfeasibleError(f"m₁ = {m1} not reached for a = {a}",
                                  {"range": (lo_r, hi_r), "sweep": table})
        raise SolverError("no bracket found on α ∈ (1, 10⁶]", table)
    lo, hi = br[0]
    if exact:
        alpha, res, it = bisect(f, lo, hi, ftol=Fraction(1, 10 ** 12), xtol=Fraction(1, 2 ** 64))
    else:
        alpha, res, it = bisect(f, mpf(lo), mpf(hi), ftol=mpf(2) ** (-mpmath.mp.prec // 2),
                                xtol=mpf(2) ** (-mpmath.mp.prec // 2 - 8))
    roots = RootTuple((Fraction(1) if exact else mpf(1), alpha), TYPE1, config.d_js)
    model = assemble_model(config, roots, a, {"method": "bisection", "iterations": it,
                                              "bracket": (lo, hi), "range": (lo_r, hi_r)})
    _check_targets(model, SOLVE_TOL)
    return model


def solve_type1_cy(config: AnsatzConfig) -> SolitonModel:
    return solve_type1_rank2(config, 0)


def solve_steady(config: AnsatzConfig, a=None) -> SolitonModel:
    a = config.a if a is None else a
    if not a > 0:
        raise ConfigError("steady solitons need a > 0")
    cfg = config.with_a(a)
    if config.case == TYPE1 and config.ell == 2:
        return solve_type1_rank2(cfg, a)
    if config.case == TYPE2 and config.ell == 2:
        return solve_type2_rank2(cfg)
    if config.case == TYPE2 and config.ell == 3:
        return solve_type2_rank3(cfg, a)
    if config.experimental:
        return solve_general(cfg)
    raise ConfigError("steady solve covers Type 1 ℓ=2 and Type 2 ℓ=2,3; use --experimental")


# Type 2 rank 3

def _relabel_rank3(config: AnsatzConfig) -> tuple[AnsatzConfig, bool]:
    m1, m2, m3 = config.m_js
    if m1 > 0 and m2 > 0 and m3 > 0 and m2 > m1:
        return config, False
    if m1 > 0 and m2 > 0 and m3 > 0 and m1 > m2:
        d = config.d_js
        cfg = AnsatzConfig(config.case, config.soliton_class, config.d_B, config.i_B,
                           (d[1], d[0], d[2]), (m2, m1, m3), config.a, config.experimental)
        return cfg, True
    raise InfeasibleError(f"rank-3 Type 2 needs m₂ ≠ m₁ and all m_j > 0, got {config.m_js}",
                          {"m": config.m_js})


def type2_rank3_deltas(alpha1, alpha3, config: AnsatzConfig, a=None):
    a = config.a if a is None else a
    roots = RootTuple((alpha1, mpf(-1), alpha3), TYPE2, config.d_js)
    q = build_q(roots, config, a)
    return [partial_degree(q, roots, j) for j in range(3)]


def _newton2(F, x0, tol, maxiter=60):
    """Damped Newton on R² with central-difference Jacobian."""
    x = [mpf(v) for v in x0]
    fx = F(x)
    nrm = max(abs(v) for v in fx)
    trace = [(list(x), nrm)]
    h = mpf(2) ** (-mpmath.mp.prec // 3)
    for _ in range(maxiter):
        if nrm <= tol:
            break
        J = [[0, 0], [0, 0]]
        for k in range(2):
            xp = list(x)
            xm = list(x)
            xp[k] += h
            xm[k] -= h
            fp, fm = F(xp), F(xm)
            for i in range(2):
                J[i][k] = (fp[i] - fm[i]) / (2 * h)
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        if det == 0:
            break
        dx = [(J[1][1] * fx[0] - J[0][1] * fx[1]) / det, (-J[1][0] * fx[0] + J[0][0] * fx[1]) / det]
        lam = mpf(1)
        while lam > 1e-6:
            xn = [x[0] - lam * dx[0], x[1] - lam * dx[1]]
            try:
                fn = F(xn)
                nn = max(abs(v) for v in fn)
            except (ValueError, ArithmeticError):
                nn = mpmath.inf
            if nn < nrm:
                break
            lam /= 2
        else:
            break
        x, fx, nrm = xn, fn, nn
        trace.append((list(x), nrm))
    return x, nrm, trace


def solve_type2_rank3(config: AnsatzConfig, a=None) -> SolitonModel:
    """Solve δ₁, δ₃ = targets over (α₁ < −1, α₃ > 0), α₂ = −1."""
    a = config.a if a is None else a
    if config.case != TYPE2 or config.ell != 3:
        raise ConfigError("needs Type 2, ℓ = 3")
    cfg, relabeled = _relabel_rank3(config.with_a(a))
    t = cfg.delta_targets

    def F(x):
        al1 = -1 - mpmath.exp(x[0])
        al3 = mpmath.exp(x[1])
        d = type2_rank3_deltas(al1, al3, cfg, a)
        return [d[0] - t[0], d[2] - t[2]]

    seeds = [(mpmath.log(u), mpmath.log(v)) for u in (mpf(1), mpf("0.3"), mpf(3), mpf("0.1"), mpf(10))
             for v in (mpf(1), mpf("0.3"), mpf(3), mpf("0.1"), mpf(10))]
    best = None
    tol = mpf(2) ** (-mpmath.mp.prec // 2)
    traces = []
    for s in seeds:
        try:
            x, nrm, tr = _newton2(F, s, tol)
        except (ValueError, ArithmeticError) as exc:
            traces.append((s, str(exc)))
            continue
        traces.append((s, nrm))
        if best is None or nrm < best[1]:
            best = (x, nrm)
        if nrm <= tol:
            break
    if best is None or best[1] > 1e-8:
        raise SolverError("Newton failed from all grid seeds", traces)
    x = best[0]
    roots = RootTuple((-1 - mpmath.exp(x[0]), mpf(-1), mpmath.exp(x[1])), TYPE2, cfg.d_js)
    model = assemble_model(cfg, roots, a, {"method": "damped Newton", "residual": best[1],
                                           "relabeled": relabeled})
    _check_targets(model, 1e-8)
    return model


# shrinkers

def shrinker_roots(alpha, config: AnsatzConfig) -> tuple:
    b = config.b
    alpha = mpf(alpha)
    return 1 / alpha, b * alpha


def shrinker_H(alpha, a, config: AnsatzConfig):
    """H(α, a) = H_L − H_R: bounded-interval minus tail moment ratio."""
    al1, al2 = shrinker_roots(alpha, config)
    d_B = config.d_B
    Q2 = Poly([config.i_B, 0, 1]).shift_power(d_B)
    Q1 = Poly.monomial(d_B + 1)
    HL = expcalc.poly_exp_integral(Q2, al1, al2, a) / expcalc.poly_exp_integral(Q1, al1, al2, a)
    HR = expcalc.tail_moment(al2, 0, Q2, a) / expcalc.tail_moment(al2, 0, Q1, a)
    return HL - HR


def shrinker_a_grid(n_per_decade: int = 20) -> list:
    return [-mpmath.power(10, mpf(-3) + mpf(k) / n_per_decade) for k in range(6 * n_per_decade + 1)]


def solve_shrinker_a(alpha, config: AnsatzConfig) -> tuple:
    """Root a < 0 of H(α, ·) of smallest |a|, with all roots found on the grid.

    The grid is −[1e-3, 1e3]; when it holds no sign change it is extended a
    decade at a time (up to 1e8), since the root drifts like a ≈ −α.
    """
    f = lambda a: shrinker_H(alpha, a, config)
    grid = shrinker_a_grid()
    br, table = scan_brackets(f, grid)
    extended = 0
    while not br and extended < 5:
        extended += 1
        lo_exp = 3 + extended - 1
        ext = [-mpmath.power(10, mpf(lo_exp) + mpf(k) / 20) for k in range(21)]
        br, more = scan_brackets(f, ext)
        table += more
    if not br:
        raise SolverError(f"no sign change of H(α={mpmath.nstr(alpha, 12)}, ·) on −[1e-3, 1e8]", table)
    roots = []
    for lo, hi in br:
        a, h, _ = bisect(f, lo, hi, ftol=mpf(2) ** (-mpmath.mp.prec + 16),
                         xtol=abs(lo) * mpf(2) ** (-mpmath.mp.prec + 8))
        roots.append((a, h))
    roots.sort(key=lambda r: abs(r[0]))
    a, h = roots[0]
    if abs(h) > H_TOL:
        raise SolverError(f"|H| = {h} above {H_TOL}", table)
    return a, h, roots


def shrink_expand_delta1(alpha, config: AnsatzConfig, a):
    al1, al2 = shrinker_roots(alpha, config)
    roots = RootTuple((al1, al2), TYPE1, config.d_js)
    q = build_q(roots, config, a)
    return partial_degree(q, roots, 0)


def shrinker_delta1(alpha, config: AnsatzConfig):
    a, _, _ = solve_shrinker_a(alpha, config)
    return shrink_expand_delta1(alpha, config, a)


def _first_bracket(f, config: AnsatzConfig, per_decade: int = 6, decades: int = 6):
    """Scan α = b^{-1/2}(1 + 10^s), s ≥ −3, stopping at the first sign change."""
    base = 1 / mpmath.sqrt(config.b)
    table = []
    prev = None
    for k in range(decades * per_decade + 1):
        x = base * (1 + mpmath.power(10, mpf(-3) + mpf(k) / per_decade))
        v = f(x)
        table.append((x, v))
        if prev is not None and prev[1] != 0 and (prev[1] > 0) != (v > 0):
            return (prev[0], x), table
        prev = (x, v)
    return None, table


def _check_rank2_shrink_expand(config: AnsatzConfig) -> tuple:
    if config.case != TYPE1 or config.ell != 2 or any(config.d_js):
        raise ConfigError("rank-2 shrinker/expander needs Type 1, ℓ = 2, d = (0, 0)")
    m1, m2 = config.m_js
    b = config.b
    if config.soliton_class == SHRINKING:
        lo, hi = Fraction(config.i_B - b, 2), Fraction(config.i_B - b)
    else:
        lo, hi = Fraction(config.i_B + b, 2), Fraction(config.i_B + b)
    if m1 == m2:
        raise InfeasibleError("m₁ = m₂ is the degenerate endpoint of the range", {"range": (lo, hi)})
    if not lo < m1 < hi:
        raise InfeasibleError(f"m₁ = {m1} outside the open range ({lo}, {hi})", {"range": (lo, hi)})
    return lo, hi


def solve_shrinker(config: AnsatzConfig) -> SolitonModel:
    """Nested solve: inner H(α, a) = 0 in a, outer δ₁(α, a(α)) = m₁ in α."""
    if config.soliton_class != SHRINKING:
        raise ConfigError("solve_shrinker needs the shrinking class")
    lo_r, hi_r = _check_rank2_shrink_expand(config)
    target = config.delta_targets[0]
    f = lambda al: shrinker_delta1(al, config) - target
    br, table = _first_bracket(f, config)
    if br is None:
        raise SolverError("no α bracket for δ₁ = m₁", table)
    lo, hi = br
    alpha, res, it = bisect(f, lo, hi, ftol=mpf(10) ** -14, xtol=mpf(10) ** -20 * hi)
    a, h, a_roots = solve_shrinker_a(alpha, config)
    al1, al2 = shrinker_roots(alpha, config)
    roots = RootTuple((al1, al2), TYPE1, config.d_js)
    model = assemble_model(config.with_a(a), roots, a,
                           {"method": "nested bisection", "alpha": alpha, "H": h, "outer_iterations": it,
                            "a_roots": [r[0] for r in a_roots], "range": (lo_r, hi_r)})
    _check_targets(model, SHRINK_OUTER_TOL)
    return model


def solve_expander(config: AnsatzConfig, a=None) -> SolitonModel:
    a = config.a if a is None else a
    if config.soliton_class != EXPANDING or not a > 0:
        raise ConfigError("solve_expander needs the expanding class and a > 0")
    lo_r, hi_r = _check_rank2_shrink_expand(config)
    target = config.delta_targets[0]
    f = lambda al: shrink_expand_delta1(al, config, a) - target
    br, table = _first_bracket(f, config)
    if br is None:
        raise SolverError("no α bracket for δ₁ = m₁", table)
    lo, hi = br
    alpha, res, it = bisect(f, lo, hi, ftol=mpf(2) ** (-mpmath.mp.prec // 2),
                            xtol=mpf(2) ** (-mpmath.mp.prec // 2 - 8) * hi)
    al1, al2 = shrinker_roots(alpha, config)
    roots = RootTuple((al1, al2), TYPE1, config.d_js)
    model = assemble_model(config.with_a(a), roots, a, {"method": "bisection", "alpha": alpha,
                                                        "iterations": it, "range": (lo_r, hi_r)})
    _check_targets(model, SHRINK_OUTER_TOL)
    return model


# general ℓ (unproved regime)

def solve_general(config: AnsatzConfig) -> SolitonModel:
    """Type 1 CY/steady for any ℓ by Newton in log-gaps; results are marked unproved."""
    if config.case != TYPE1 or config.soliton_class not in (CY, STEADY):
        raise ConfigError("experimental solver covers Type 1 CY/steady only")
    ell = config.ell
    a = config.a
    t = config.delta_targets

    def roots_of(x):
        al = [mpf(1)]
        for v in x:
            al.append(al[-1] + mpmath.exp(v))
        return RootTuple(tuple(al), TYPE1, config.d_js)

    def F(x):
        r = roots_of(x)
        q = build_q(r, config, a)
        return [partial_degree(q, r, j) - t[j] for j in range(ell - 1)]

    x = [mpf(0)] * (ell - 1)
    h = mpf(2) ** (-mpmath.mp.prec // 3)
    nrm = None
    for _ in range(80):
        fx = F(x)
        nrm = max(abs(v) for v in fx)
        if nrm <= mpf(2) ** (-mpmath.mp.prec // 2):
            break
        J = mpmath.matrix(ell - 1, ell - 1)
        for k in range(ell - 1):
            xp = list(x)
            xm = list(x)
            xp[k] += h
            xm[k] -= h
            fp, fm = F(xp), F(xm)
            for i in range(ell - 1):
                J[i, k] = (fp[i] - fm[i]) / (2 * h)
        dx = mpmath.lu_solve(J, mpmath.matrix(fx))
        lam = mpf(1)
        while lam > 1e-8:
            xn = [x[i] - lam * dx[i] for i in range(ell - 1)]
            try:
                if max(abs(v) for v in F(xn)) < nrm:
                    break
            except (ValueError, ArithmeticError):
                pass
            lam /= 2
        x = xn
    if nrm is None or nrm > 1e-8:
        raise SolverError(f"experimental Newton stalled at residual {nrm}")
    model = assemble_model(config, roots_of(x), a, {"method": "experimental Newton",
                                                    "unproved_regime": True})
    _check_targets(model, 1e-8)
    return model


def solve(config: AnsatzConfig) -> SolitonModel:
    """Dispatch on case, class and ℓ."""
    cls, case, ell = config.soliton_class, config.case, config.ell
    if cls == CY:
        if case == TYPE2 and ell == 2:
            return solve_type2_rank2(config)
        if case == TYPE2 and ell == 3:
            return solve_type2_rank3(config, 0)
        if case == TYPE1 and ell == 2:
            return solve_type1_cy(config)
        if config.experimental and case == TYPE1:
            return solve_general(config)
        raise ConfigError(f"no proved solver for {case} CY with ℓ = {ell}; use --experimental")
    if cls == STEADY:
        return solve_steady(config)
    if cls == SHRINKING:
        return solve_shrinker(config)
    return solve_expander(config)
