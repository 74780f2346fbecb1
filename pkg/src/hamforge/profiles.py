"""Defining polynomial q(t) and the profile functions F_j, Θ_j.

Every profile is stored in closed form

    F(t) = t^{-d_B} (P(t) + c e^{-a (t - t0)}),

which solves F' + (d_B/t + a) F = 2 p_c q whenever P' + a P = 2 t^{d_B} p_c q.
The hom coefficient is kept relative to an anchor t0 so that no huge
exponentials are formed. Θ_j = F_j / p_c, with the removable zeros of p_c
at the endpoints of I_j deflated by a local Taylor expansion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np

from . import expcalc
from .expcalc import mpf
from .polycore import (TYPE1, TYPE2, Poly, RootTuple, as_exact, partial_degree,
                       solve_linear, hermite_interpolate)

CY, STEADY, SHRINKING, EXPANDING = "cy", "steady", "shrinking", "expanding"
CLASSES = (CY, STEADY, SHRINKING, EXPANDING)


class ConfigError(ValueError):
    pass


class ObstructionError(ConfigError):
    """Type 2 shrinking or expanding data: no complete soliton exists."""


class ConstructionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class AnsatzConfig:
    """Discrete problem data.

    Parameters
    ----------
    case : {"type1", "type2"}
    soliton_class : {"cy", "steady", "shrinking", "expanding"}
    d_B, i_B : int
        Base dimension and Fano index.
    d_js, m_js : tuple of int
        Fiber multiplicities and bundle twists; ℓ = len(d_js).
    a : number
        Soliton scale; 0 for CY, chosen > 0 for steady and expanding,
        solved (< 0) for shrinking.
    """

    case: str
    soliton_class: str
    d_B: int
    i_B: int
    d_js: tuple
    m_js: tuple
    a: object = 0
    experimental: bool = False

    def __post_init__(self):
        object.__setattr__(self, "d_js", tuple(int(x) for x in self.d_js))
        object.__setattr__(self, "m_js", tuple(int(x) for x in self.m_js))
        object.__setattr__(self, "a", as_exact(self.a) if not isinstance(self.a, float) else self.a)
        if self.case not in (TYPE1, TYPE2):
            raise ConfigError(f"unknown case {self.case!r}")
        if self.soliton_class not in CLASSES:
            raise ConfigError(f"unknown soliton class {self.soliton_class!r}")
        if self.case == TYPE2 and self.soliton_class in (SHRINKING, EXPANDING):
            raise ObstructionError(
                "Type 2 shrinking/expanding solitons cannot be complete: the profile "
                "on one unbounded interval is dominated by a degree-ℓ rational function")
        if self.d_B < 1 or self.i_B < 1:
            raise ConfigError("need d_B ≥ 1 and i_B ≥ 1")
        if len(self.d_js) != len(self.m_js) or not self.d_js:
            raise ConfigError("d_js and m_js must be nonempty and of equal length")
        if any(d < 0 for d in self.d_js):
            raise ConfigError("d_j must be nonnegative")
        if self.case == TYPE2 and (self.ell < 2 or self.d_js[-1] != 0):
            raise ConfigError("Type 2 needs ℓ ≥ 2 and d_ℓ = 0")
        tot = self.weighted_m
        cls = self.soliton_class
        if cls in (CY, STEADY) and tot != self.i_B:
            raise ConfigError(f"Σ(d_j+1)m_j = {tot} must equal i_B = {self.i_B}")
        if cls == SHRINKING and not 0 < tot < self.i_B:
            raise ConfigError(f"shrinking needs 0 < Σ(d_j+1)m_j = {tot} < i_B = {self.i_B}")
        if cls == EXPANDING and not tot > self.i_B:
            raise ConfigError(f"expanding needs Σ(d_j+1)m_j = {tot} > i_B = {self.i_B}")
        a = self.a
        if cls == CY and a != 0:
            raise ConfigError("CY metrics have a = 0")
        if cls in (STEADY, EXPANDING) and not a > 0:
            raise ConfigError(f"{cls} solitons need a > 0")

    @property
    def ell(self) -> int:
        return len(self.d_js)

    @property
    def r(self) -> int:
        return self.ell + sum(self.d_js)

    @property
    def n(self) -> int:
        return self.d_B + self.r

    @property
    def weighted_m(self) -> int:
        return sum((d + 1) * m for d, m in zip(self.d_js, self.m_js))

    @property
    def b(self) -> int:
        return abs(self.weighted_m - self.i_B)

    @property
    def q_ell(self) -> int:
        return {CY: 0, STEADY: 0, SHRINKING: -1, EXPANDING: 1}[self.soliton_class]

    @property
    def eps_B(self) -> int:
        return (-1) ** self.ell if self.case == TYPE1 else -1

    @property
    def eps_js(self) -> tuple:
        # fixed by ε_j p_nc(α_j) > 0 on the domain
        ell = self.ell
        if self.case == TYPE1:
            return tuple((-1) ** (ell - j + 1) for j in range(1, ell + 1))
        return tuple((-1) ** (ell - j) for j in range(1, ell + 1))

    @property
    def delta_sign(self) -> int:
        """Targets are δ_j = (−1)^ℓ ε_B m_j."""
        return (-1) ** self.ell * self.eps_B

    @property
    def delta_targets(self) -> tuple:
        return tuple(self.delta_sign * m for m in self.m_js)

    @property
    def q0(self):
        """Normalization q(0) = −ε_B i_B."""
        return Fraction(-self.eps_B * self.i_B)

    def with_a(self, a) -> "AnsatzConfig":
        return AnsatzConfig(self.case, self.soliton_class, self.d_B, self.i_B,
                            self.d_js, self.m_js, a, self.experimental)


# polynomial q

def _moment_rows(roots: RootTuple, d_B: int, a, powers, intervals):
    p_c = roots.p_c()
    rows = []
    for lo, hi in intervals:
        rows.append([expcalc.poly_exp_integral(p_c.shift_power(d_B + k), lo, hi, a) for k in powers])
    return rows


def _solve_q(roots: RootTuple, config: AnsatzConfig, a, top: int, fixed: dict, intervals) -> Poly:
    """Solve for the free coefficients of q (degree ≤ top) given fixed ones."""
    free = [k for k in range(top + 1) if k not in fixed]
    if len(free) != len(intervals):
        raise ConstructionError("moment system is not square")
    if not free:
        return Poly([fixed.get(k, 0) for k in range(top + 1)])
    M_free = _moment_rows(roots, config.d_B, a, free, intervals)
    fixed_keys = sorted(fixed)
    M_fixed = _moment_rows(roots, config.d_B, a, fixed_keys, intervals) if fixed_keys else [[] for _ in intervals]
    aug = []
    for row_f, row_x in zip(M_free, M_fixed):
        rhs = -sum((c * fixed[k] for c, k in zip(row_x, fixed_keys)), Fraction(0))
        aug.append(list(row_f) + [rhs])
    sol = solve_linear(aug)
    if sol is None:
        raise ConstructionError("singular moment system")
    coeffs = dict(fixed)
    coeffs.update(zip(free, sol))
    return Poly([coeffs[k] for k in range(top + 1)])


def check_alternation(q: Poly, roots: RootTuple) -> tuple[bool, list]:
    """Sign pattern of q at the roots required for positive profiles."""
    al = roots.alphas
    ell = len(al)
    vals = [q(x) for x in al]
    if roots.case == TYPE1:
        ok = all((-1) ** (ell - j) * vals[j - 1] > 0 for j in range(1, ell + 1))
    else:
        ok = all((-1) ** (ell - j + 1) * vals[j - 1] > 0 for j in range(1, ell))
        ok = ok and vals[-1] * vals[-2] > 0
    return ok, vals


def build_q_type1(roots: RootTuple, config: AnsatzConfig, a=0) -> Poly:
    """q of degree ℓ−1 with the ℓ−1 bounded moment constraints, q(0) = (−1)^{ℓ−1} i_B."""
    ell = roots.ell
    iv = [(roots.alphas[j], roots.alphas[j + 1]) for j in range(ell - 1)]
    q = _solve_q(roots, config, a, ell - 1, {0: config.q0}, iv)
    ok, vals = check_alternation(q, roots)
    if not ok:
        raise ConstructionError(f"sign alternation fails: q(α_j) = {vals}")
    return q


def build_q_cy_type1(roots: RootTuple, config: AnsatzConfig) -> Poly:
    return build_q_type1(roots, config, 0)


def build_q_type2(roots: RootTuple, config: AnsatzConfig, a=0) -> Poly:
    """q of degree ℓ−2 with ℓ−2 bounded moment constraints and q(0) = i_B."""
    ell = roots.ell
    iv = [(roots.alphas[j], roots.alphas[j + 1]) for j in range(ell - 2)]
    q = _solve_q(roots, config, a, ell - 2, {0: config.q0}, iv)
    ok, vals = check_alternation(q, roots)
    if not ok:
        raise ConstructionError(f"Type 2 sign alternation fails: q(α_j) = {vals}")
    return q


def build_q_shrink_expand(roots: RootTuple, config: AnsatzConfig, a) -> Poly:
    """q = q_ℓ t^ℓ + … + q₀ with q₀ = −ε_B i_B and the interior moment constraints.

    The tail condition of the shrinker is not imposed here; it is the
    equation the solver uses for a.
    """
    ell = roots.ell
    iv = [(roots.alphas[j], roots.alphas[j + 1]) for j in range(ell - 1)]
    return _solve_q(roots, config, a, ell, {0: config.q0, ell: Fraction(config.q_ell)}, iv)


def build_q(roots: RootTuple, config: AnsatzConfig, a=None) -> Poly:
    a = config.a if a is None else a
    if config.soliton_class in (SHRINKING, EXPANDING):
        return build_q_shrink_expand(roots, config, a)
    if config.case == TYPE1:
        return build_q_type1(roots, config, a)
    return build_q_type2(roots, config, a)


def build_q_hermite(roots: RootTuple, config: AnsatzConfig) -> Poly:
    """CY q via Lagrange-Sylvester interpolation of P with P(0) = 0.

    Independent of the moment route: F = P + t^{-d_B} vanishes to order
    d_j + 1 at each α_j (all j for Type 1, j < ℓ for Type 2), then
    q = (P' + d_B P / t) / (2 p_c), rescaled to the normalization of q(0).
    """
    al = roots.alphas
    nodes = range(roots.ell) if roots.case == TYPE1 else range(roots.ell - 1)
    cons = [(0, 0, 0)]
    d_B = config.d_B
    for j in nodes:
        for k in range(roots.d_js[j] + 1):
            fall = 1
            for s in range(k):
                fall *= -d_B - s
            cons.append((al[j], k, -fall * al[j] ** (-d_B - k)))
    P = hermite_interpolate(cons, len(cons) - 1)
    num = P.deriv() + Poly(P.coeffs[1:]) * config.d_B
    q, rem = num.divmod(roots.p_c() * 2)
    if not rem.is_zero:
        raise ConstructionError("P' + d_B P/t not divisible by p_c")
    return q * (config.q0 / q(0))


# profiles

@dataclass(frozen=True)
class Profile:
    """F(t) = t^{-d_B} (P(t) + c e^{-a (t - t0)})."""

    P: Poly
    c: object
    anchor: object
    a: object
    d_B: int

    def _E(self, t):
        if self.a == 0:
            return 1
        return mpmath.exp(-mpf(self.a) * (t - mpf(self.anchor)))

    def Ftilde(self, t, m: int = 0):
        """m-th derivative of t^{d_B} F."""
        Pm = self.P.deriv(m) if m else self.P
        if self.c == 0:
            return Pm(t)
        if self.a == 0:
            return Pm(t) + (self.c if m == 0 else 0)
        return Pm(t) + mpf(self.c) * (-mpf(self.a)) ** m * self._E(mpf(t))

    def __call__(self, t, m: int = 0):
        """m-th derivative of F at t (Leibniz on t^{-d_B} · F̃)."""
        exact = self.P.is_exact and isinstance(as_exact(self.c), Fraction) and self.a == 0 \
            and isinstance(as_exact(t), Fraction)
        t = as_exact(t) if exact else mpf(t)
        acc = 0
        for i in range(m + 1):
            fall = 1
            for s in range(i):
                fall *= -self.d_B - s
            acc += comb(m, i) * fall * t ** (-self.d_B - i) * self.Ftilde(t, m - i)
        return acc

    @property
    def is_exact(self) -> bool:
        return self.P.is_exact and self.a == 0 and isinstance(as_exact(self.c), Fraction)


@dataclass(frozen=True)
class ProfileSet:
    """Profiles F_1..F_ℓ with Θ_j = F_j / p_c.

    ``beta`` is the analytic degree of Θ_ℓ at +∞; ``beta_minus`` the degree
    of Θ_1 at −∞ (Type 2 only). Exponential growth is reported as inf.
    """

    q: Poly
    roots: RootTuple
    d_B: int
    a: object
    profiles: tuple
    c_anchored: object = None
    beta: object = None
    beta_minus: object = None
    soliton_class: str = CY

    @property
    def ell(self) -> int:
        return self.roots.ell

    @property
    def p_c(self) -> Poly:
        return self.roots.p_c()

    def F(self, j: int, t, m: int = 0):
        return self.profiles[j](t, m)

    def boundary(self, j: int) -> list[int]:
        """Indices k with α_k an endpoint of I_j (0-based)."""
        ell = self.ell
        if self.roots.case == TYPE1:
            return [j, j + 1] if j < ell - 1 else [ell - 1]
        if j == 0:
            return [0]
        if j == ell - 1:
            return [ell - 1]
        return [j - 1, j]

    def theta(self, j: int, t):
        """Θ_j(t), deflating p_c near endpoints of I_j where d_k > 0."""
        al = self.roots.alphas
        d = self.roots.d_js
        prof = self.profiles[j]
        for k in self.boundary(j):
            if d[k] == 0:
                continue
            h = mpf(t) - mpf(al[k])
            if abs(h) < 1e-2 * max(1, abs(mpf(al[k]))):
                return self._theta_taylor(j, k, h)
        if prof.is_exact and isinstance(as_exact(t), Fraction):
            return prof(t) / self.p_c(as_exact(t))
        t = mpf(t)
        return prof(t) / self.p_c.to_mpf()(t)

    def _theta_taylor(self, j: int, k: int, h):
        al = self.roots.alphas
        d = self.roots.d_js
        prof = self.profiles[j]
        x0 = mpf(al[k])
        # Taylor coefficients of F̃ at α_k beyond order d_k
        acc = mpf(0)
        Pm = prof.P.to_mpf()
        m = d[k]
        while True:
            m += 1
            term = Pm.deriv(m)(x0) / factorial(m) if m <= Pm.degree else mpf(0)
            if prof.c != 0 and prof.a != 0:
                term += mpf(prof.c) * prof._E(x0) * (-mpf(prof.a)) ** m / factorial(m)
            term *= h ** (m - d[k])
            acc += term
            if m > Pm.degree and abs(term) <= mpmath.eps * abs(acc):
                break
            if m > Pm.degree + 400:
                break
        others = mpf(1)
        for i, a_i in enumerate(al):
            if i != k:
                others *= (x0 + h - mpf(a_i)) ** d[i]
        return (x0 + h) ** (-self.d_B) * acc / others

    def theta_deriv(self, j: int, t, m: int = 1):
        if self.p_c.degree == 0:
            return self.profiles[j](t, m) / self.p_c.coeff(0)
        return mpmath.diff(lambda s: self.theta(j, s), mpf(t), m)

    def boundary_values(self, j: int, k: int):
        """(Θ_j(α_k), (d_k+1) Θ_j'(α_k)) from Taylor data of F̃ at α_k.

        Also returns the largest lower-order Taylor coefficient of F̃, which
        must vanish for Θ_j to extend across α_k.
        """
        al = self.roots.alphas
        d = self.roots.d_js
        prof = self.profiles[j]
        x0 = al[k]
        if not prof.is_exact or not isinstance(x0, Fraction):
            x0 = mpf(x0)
        low = [prof.Ftilde(x0, m) for m in range(d[k] + 1)]
        phat = 1
        for i, a_i in enumerate(al):
            if i != k:
                phat *= (x0 - a_i) ** d[i]
        lead = prof.Ftilde(x0, d[k] + 1)
        dtheta = x0 ** (-self.d_B) * lead / (factorial(d[k] + 1) * phat)
        theta0 = x0 ** (-self.d_B) * low[d[k]] / (factorial(d[k]) * phat)
        return theta0, (d[k] + 1) * dtheta, low


def _degree_at_infinity(prof: Profile, p_c: Poly, d_B: int, sign: int):
    grows = prof.c != 0 and prof.a != 0 and (sign * prof.a < 0)
    if grows:
        return mpmath.inf
    if prof.P.is_zero:
        return -d_B - p_c.degree
    return prof.P.degree - d_B - p_c.degree


def build_profiles(q: Poly, roots: RootTuple, config: AnsatzConfig, a=None) -> ProfileSet:
    """Closed-form profiles for each case.

    Type 1: one F anchored at α₁ (shrinking: pure rational part, c = 0).
    Type 2: F_1..F_{ℓ−1} anchored at α₁, F_ℓ anchored at α_ℓ.
    """
    a = config.a if a is None else a
    a = as_exact(a)
    d_B = config.d_B
    Q = expcalc.weighted_integrand(d_B, roots.p_c(), q)
    if a == 0:
        P = Q.antideriv() * 2
    else:
        P = expcalc.exp_antiderivative(Q, a).poly * 2
    al = roots.alphas

    def anchored(x0):
        return Profile(P, -P(x0), x0, a, d_B)

    first = anchored(al[0])
    if roots.case == TYPE1:
        if config.soliton_class == SHRINKING:
            main = Profile(P, Fraction(0), al[0], a, d_B)
        else:
            main = first
        profs = (main,) * roots.ell
    else:
        profs = (first,) * (roots.ell - 1) + (anchored(al[-1]),)
    p_c = roots.p_c()
    beta = _degree_at_infinity(profs[-1], p_c, d_B, +1)
    beta_minus = _degree_at_infinity(profs[0], p_c, d_B, -1) if roots.case == TYPE2 else None
    ps = ProfileSet(q, roots, d_B, a, profs, c_anchored=first.c, beta=beta,
                    beta_minus=beta_minus, soliton_class=config.soliton_class)
    _check_deflation(ps)
    return ps


def _check_deflation(ps: ProfileSet) -> None:
    # Θ_j = F_j/p_c needs F̃_j to vanish to order d_k at endpoints with d_k > 0
    d = ps.roots.d_js
    for j in range(ps.ell):
        for k in ps.boundary(j):
            if d[k] == 0:
                continue
            _, _, low = ps.boundary_values(j, k)
            scale = max([1] + [abs(mpf(c)) for c in ps.profiles[j].P.coeffs])
            for m, v in enumerate(low[:d[k]]):
                if ps.profiles[j].is_exact and v != 0 or abs(mpf(v)) > 1e-20 * scale:
                    raise ConstructionError(
                        f"F̃_{j + 1}^({m})(α_{k + 1}) = {v}: p_c does not divide the profile")


# certification

@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    tol: object = None
    detail: str = ""

    def to_dict(self) -> dict:
        def enc(x):
            if x is None or isinstance(x, (bool, int, str)):
                return x
            if isinstance(x, Fraction):
                return f"{x.numerator}/{x.denominator}"
            try:
                return mpmath.nstr(mpf(x), 12)
            except Exception:
                return str(x)
        return {"name": self.name, "passed": bool(self.passed), "value": enc(self.value),
                "tol": enc(self.tol), "detail": self.detail}


@dataclass
class CertificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        self.checks.append(c)
        return c

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def extend(self, other: "CertificationReport") -> None:
        self.checks.extend(other.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def text(self) -> str:
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            v = c.to_dict()
            extra = f" value={v['value']}" if v["value"] is not None else ""
            extra += f" tol={v['tol']}" if v["tol"] is not None else ""
            lines.append(f"[{flag}] {c.name}{extra} {c.detail}".rstrip())
        return "\n".join(lines)


def required_sign(roots: RootTuple, j: int) -> int:
    """Sign Θ_j must have on I_j (0-based j)."""
    ell = roots.ell
    if roots.case == TYPE1:
        return (-1) ** (ell - j - 1)
    if j == ell - 1:
        return 1
    return (-1) ** (ell - j - 1)


def interval_grid(lo, hi, n: int = 200) -> list:
    """Interior sample points; log-spaced toward infinite ends."""
    lo_inf = lo == -mpmath.inf
    hi_inf = hi == mpmath.inf
    if not lo_inf and not hi_inf:
        lo, hi = mpf(lo), mpf(hi)
        return [lo + (hi - lo) * (1 - mpmath.cos(mpmath.pi * (k + 0.5) / n)) / 2 for k in range(n)]
    base = mpf(hi if lo_inf else lo)
    scale = max(abs(base), mpf(1))
    offs = [scale * mpf(10) ** (mpf(-6) + mpf(12) * k / (n - 1)) for k in range(n)]
    return [base - o for o in offs] if lo_inf else [base + o for o in offs]


def _bisect_sign_change(f, x0, x1, iters: int = 60):
    f0 = mpmath.sign(f(x0))
    for _ in range(iters):
        xm = (x0 + x1) / 2
        if mpmath.sign(f(xm)) == f0:
            x0 = xm
        else:
            x1 = xm
    return (x0 + x1) / 2


def measured_degree(ps: ProfileSet, j: int, sign: int = 1, npts: int = 20):
    """Fit log|Θ_j| = β log|t| + c₀ + c₁/t over the last decade [10³, 10⁴]·|α_end|."""
    end = mpf(ps.roots.alphas[-1] if sign > 0 else ps.roots.alphas[0])
    base = abs(end)
    ts = [base * mpf(10) ** (3 + mpf(k) / (npts - 1)) for k in range(npts)]
    rows, rhs = [], []
    for T in ts:
        th = ps.theta(j, sign * T)
        if th == 0 or not mpmath.isfinite(th):
            return mpmath.inf
        rows.append([float(mpmath.log(T)), 1.0, float(1 / T)])
        rhs.append(float(mpmath.log(abs(th))))
    coef, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return float(coef[0])


def certify_profiles(ps: ProfileSet, config: AnsatzConfig, grid: int = 200) -> CertificationReport:
    """Positivity, boundary, degree, completeness and ODE checks."""
    rep = CertificationReport()
    roots = ps.roots
    al = roots.alphas
    ell = roots.ell
    ivs = roots.intervals()

    ok, vals = check_alternation(ps.q, roots)
    rep.add("q_sign_alternation", ok, detail=f"q(α_j)={[mpmath.nstr(mpf(v), 8) for v in vals]}")

    # (a) positivity
    worst = None
    bad = []
    for j, (lo, hi) in enumerate(ivs):
        s = required_sign(roots, j)
        pts = interval_grid(lo, hi, grid)
        f = lambda t, j=j: ps.theta(j, t)
        prev = None
        for t in pts:
            v = s * f(t)
            if worst is None or v < worst[0]:
                worst = (v, j, t)
            if v <= 0:
                loc = _bisect_sign_change(f, prev, t) if prev is not None else t
                bad.append(f"I_{j + 1} sign violation near t={mpmath.nstr(loc, 10)}")
                break
            prev = t
        # endpoint asymptotics: sign of Θ just inside finite endpoints
        for k in ps.boundary(j):
            _, dth, _ = ps.boundary_values(j, k)
            inward = 1 if lo != -mpmath.inf and mpf(al[k]) == mpf(lo) else -1
            if s * inward * dth <= 0:
                bad.append(f"I_{j + 1} wrong sign at endpoint α_{k + 1}")
    rep.add("positivity", not bad, value=worst[0] if worst else None,
            detail="; ".join(bad) if bad else f"{grid} pts/interval")

    # (b) boundary conditions Θ(α_k) = 0, (d_k+1)Θ'(α_k) = 2q(α_k)
    errs = []
    for j in range(ell):
        for k in ps.boundary(j):
            th0, dth, low = ps.boundary_values(j, k)
            target = 2 * ps.q(al[k])
            e0 = max(abs(mpf(v)) for v in low) / max(1, max(abs(mpf(c)) for c in ps.profiles[j].P.coeffs))
            e1 = abs(mpf(dth - target)) / max(1, abs(mpf(target)))
            errs.append(max(e0, e1))
    exact = all(p.is_exact for p in ps.profiles) and all(isinstance(x, Fraction) for x in al)
    err = max(errs) if errs else mpf(0)
    rep.add("boundary", err == 0 if exact else err <= 1e-10, value=err, tol=0 if exact else 1e-10,
            detail="exact" if exact else "")

    # (c) completeness and (d) C^r structure
    betas = [ps.beta] + ([ps.beta_minus] if ps.beta_minus is not None else [])
    bmax = max(mpf(b) for b in betas)
    rep.add("completeness", bmax < ell + 1, value=bmax, tol=ell + 1,
            detail="β < ℓ+1" + ("" if bmax < ell + 1 else "; profile grows exponentially or too fast"))
    lim = ell if roots.case == TYPE1 else ell - 1
    rep.add("cr_structure", bmax <= lim, value=bmax, tol=lim, detail=f"β ≤ {lim}")

    # measured degree against the representation
    mdeg = measured_degree(ps, ell - 1, +1)
    dev = abs(mdeg - float(ps.beta)) if mpmath.isfinite(ps.beta) else float("inf")
    rep.add("degree_measured", dev <= 1e-3, value=mdeg, tol=1e-3, detail=f"analytic β={ps.beta}")

    # (e) ODE residual: polynomial identity, then pointwise
    Q = expcalc.weighted_integrand(ps.d_B, ps.p_c, ps.q)
    P = ps.profiles[0].P
    ident = P.deriv() + P * ps.a - Q * 2
    if ident.is_exact:
        poly_res = Fraction(0) if ident.is_zero else max(abs(c) for c in ident.coeffs)
    else:
        sc = max([1] + [abs(mpf(c)) for c in (Q * 2).coeffs])
        poly_res = max([mpf(0)] + [abs(mpf(c)) for c in ident.coeffs]) / sc
    pw = mpf(0)
    a = mpf(ps.a)
    for j, (lo, hi) in enumerate(ivs):
        for t in interval_grid(lo, hi, 50):
            F = ps.F(j, t)
            dF = ps.F(j, t, 1)
            rhs = 2 * ps.p_c.to_mpf()(t) * ps.q.to_mpf()(t)
            res = dF + (ps.d_B / t + a) * F - rhs
            pw = max(pw, abs(res) / max(abs(dF), abs(rhs), abs(a * F), 1))
    rep.add("ode_residual", (poly_res == 0 if ident.is_exact else poly_res <= 1e-10) and pw <= 1e-10,
            value=max(mpf(poly_res), pw), tol=1e-10)

    # global Ricci-flatness / soliton normalization q(0) = −ε_B i_B
    rep.add("q0_normalization", ps.q(0) == config.q0 if ps.q.is_exact
            else abs(mpf(ps.q(0)) - mpf(config.q0)) <= 1e-20, value=ps.q(0), tol=config.q0)

    if config.soliton_class == SHRINKING:
        rep.extend(_certify_rational_shrinker(ps))
    return rep


def _certify_rational_shrinker(ps: ProfileSet) -> CertificationReport:
    """c = 0: the α₁-anchored solution agrees with the rational profile on [α₂, 10α₂]."""
    rep = CertificationReport()
    al2 = mpf(ps.roots.alphas[-1])
    a = mpf(ps.a)
    d_B = ps.d_B
    Q = expcalc.weighted_integrand(d_B, ps.p_c, ps.q).to_mpf()
    worst_anchor = mpf(0)
    worst_tail = mpf(0)
    prof = ps.profiles[-1]
    c_anch = mpf(ps.c_anchored)
    for k in range(1, 41):
        t = al2 * (1 + mpf(9) * k / 40)
        F = prof(t)
        anch = abs(c_anch * mpmath.exp(-a * (t - mpf(ps.roots.alphas[0]))) * t ** (-d_B))
        worst_anchor = max(worst_anchor, anch / abs(F))
        tail = mpmath.quad(lambda x: Q(x) * mpmath.exp(a * (x - t)), [t, t + 50 / abs(a), mpmath.inf])
        F_tail = -2 * t ** (-d_B) * tail
        worst_tail = max(worst_tail, abs(F_tail - F) / abs(F))
    rep.add("shrinker_c_zero", prof.c == 0 and worst_anchor <= 1e-10, value=worst_anchor, tol=1e-10,
            detail="|c_anchored e^{-at} t^{-d_B}| / |F| on (α₂, 10α₂]")
    rep.add("shrinker_tail_moment", worst_tail <= 1e-10, value=worst_tail, tol=1e-10,
            detail="F vs −2t^{-d_B}e^{-at}∫_t^∞ x^{d_B}p_c q e^{ax}")
    return rep


def partial_degrees(q: Poly, roots: RootTuple) -> list:
    return [partial_degree(q, roots, j) for j in range(roots.ell)]
