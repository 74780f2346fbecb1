"""Pointwise geometry of the ansatz metric and numerical checks on it.

The fiber metric in momentum/angle coordinates (ξ, t) is

    g = Σ_j Δ(ξ_j)/Θ_j(ξ_j) dξ_j² + Σ_j Θ_j(ξ_j)/Δ(ξ_j) (Σ_r σ_{r−1}(ξ̂_j) dt_r)²,
    ω = Σ_r dσ_r ∧ dt_r.

Only fiber quantities are evaluated; the base enters through the scalar
factors ε_B p_nc(0) and ε_j p_nc(α_j).

The Ricci oracle works in the pluriharmonic chart y_r (holomorphic
coordinates z_r = y_r ± i t_r) and never uses the profile ODE: it needs the
values of Θ_j only. All functions are torus invariant, so ∂_r∂̄_s f equals
¼ ∂²f/∂y_r∂y_s, which is what the finite differences compute.

Conventions: ω = dd^c H with dd^c = 2i∂∂̄, so the Hermitian coefficient
matrix of ω is h = 2G where G = ∂∂̄H. The residual reported for the weighted
equation is R + q_ℓ h − W with R = −∂∂̄ log det G and W = ∂∂̄ w.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .expcalc import mpf
from .polycore import TYPE1, elem_symmetric, elem_symmetric_hat, vandermonde_delta

log = logging.getLogger(__name__)

KAHLER_FORM_FACTOR = 2      # h = KAHLER_FORM_FACTOR * ∂∂̄H
COMPAT_TOL = 1e-10
CR_TOL = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 30
BOUNDARY_REL = 1e-6


class DomainError(ValueError):
    """Point outside, or too close to the boundary of, the open domain."""


class ChartError(ArithmeticError):
    pass


class IncompleteMetricError(ValueError):
    pass


class OracleRegimeError(ValueError):
    pass


# basic pointwise data

def _scale(model) -> mpmath.mpf:
    return max([mpf(1)] + [abs(mpf(a)) for a in model.alphas])


def check_interior(model, xi) -> None:
    """Raise DomainError unless ξ_j lies in I_j, 10⁻⁶·scale away from its ends."""
    xi = [mpf(x) for x in xi]
    if len(xi) != model.ell:
        raise DomainError(f"expected {model.ell} coordinates, got {len(xi)}")
    tol = BOUNDARY_REL * _scale(model)
    for j, (lo, hi) in enumerate(model.roots.intervals()):
        x = xi[j]
        lo, hi = mpf(lo), mpf(hi)
        if not (lo < x < hi):
            raise DomainError(f"ξ_{j + 1} = {mpmath.nstr(x, 8)} outside ({lo}, {hi})")
        if min(abs(x - lo), abs(hi - x)) < tol:
            raise DomainError(f"ξ_{j + 1} within {tol} of the boundary")


def thetas(model, xi, m: int = 0) -> list:
    """[Θ_j^{(m)}(ξ_j)]."""
    ps = model.profiles
    if m == 0:
        return [ps.theta(j, mpf(x)) for j, x in enumerate(xi)]
    return [ps.theta_deriv(j, mpf(x), m) for j, x in enumerate(xi)]


def s_vectors(xi) -> list:
    """s_j = (σ_{r−1}(ξ̂_j))_{r=1..ℓ}, the gradient of σ in ξ_j."""
    ell = len(xi)
    return [[mpf(elem_symmetric_hat(xi, r - 1, j)) for r in range(1, ell + 1)] for j in range(ell)]


def fiber_blocks(model, xi):
    """(g_ξξ diagonal, g_tt) at ξ."""
    xi = [mpf(x) for x in xi]
    ell = len(xi)
    th = thetas(model, xi)
    dl = [mpf(vandermonde_delta(xi, j)) for j in range(ell)]
    S = s_vectors(xi)
    gxx = [dl[j] / th[j] for j in range(ell)]
    gtt = mpmath.zeros(ell, ell)
    for j in range(ell):
        w = th[j] / dl[j]
        for r in range(ell):
            for s in range(ell):
                gtt[r, s] += w * S[j][r] * S[j][s]
    return gxx, gtt


def k_norms(model, xi) -> tuple:
    """(‖K_1‖², ..., ‖K_ℓ‖², then ⟨K_r, K_s⟩ for r < s) with K_r = ∂/∂t_r."""
    _, gtt = fiber_blocks(model, xi)
    ell = gtt.rows
    return tuple([gtt[r, r] for r in range(ell)] + [gtt[r, s] for r in range(ell) for s in range(r + 1, ell)])


def base_factors(model, xi) -> tuple:
    """(ε_B p_nc(0), ε_1 p_nc(α_1), …, ε_ℓ p_nc(α_ℓ)); all must be positive."""
    xi = [mpf(x) for x in xi]
    cfg = model.config

    def p_nc(t):
        return mpmath.fprod(t - x for x in xi)

    out = [cfg.eps_B * p_nc(mpf(0))]
    out += [e * p_nc(mpf(a)) for e, a in zip(cfg.eps_js, model.alphas)]
    return tuple(out)


def _face_signs(model) -> list:
    """Sign of p_nc(α_k) on the open domain: (−1)^{#intervals above α_k}."""
    out = []
    for a in model.alphas:
        above = sum(1 for lo, _ in model.roots.intervals() if mpf(lo) >= mpf(a))
        out.append((-1) ** above)
    return out


def moment_coordinates(model, xi) -> tuple:
    """Translated orthant coordinates x_k = (d_k+1) s_k p_nc(α_k)/|q(α_k)|.

    p_nc(α_k) = Σ_r (−1)^r σ_r α_k^{ℓ−r} + α_k^ℓ is affine in σ and vanishes
    on the face ξ = α_k; s_k is its sign on the domain. The image of
    σ = (σ_1, …, σ_ℓ) is then {x_k ≥ 0}, a translated orthant in the basis
    dual to these functionals.
    """
    xi = [mpf(x) for x in xi]
    sg = sigma(xi)
    ell = len(xi)
    out = []
    for k, (a, s_k) in enumerate(zip(model.alphas, _face_signs(model))):
        a = mpf(a)
        pnc = a ** ell + mpmath.fsum((-1) ** r * sg[r - 1] * a ** (ell - r) for r in range(1, ell + 1))
        out.append((model.roots.d_js[k] + 1) * s_k * pnc / abs(mpf(model.q(a))))
    return tuple(out)


def sigma(xi) -> list:
    return [mpf(elem_symmetric(xi, r)) for r in range(1, len(xi) + 1)]


@dataclass
class MetricSample:
    xi: tuple
    t: tuple
    g_matrix: object
    J: object
    base_factors: tuple
    k_norms: tuple
    min_eig: object
    compat: dict = field(default_factory=dict)
    sec_data: dict | None = None
    ricci_residual: object = None

    d_js: tuple = ()

    @property
    def positive(self) -> bool:
        """Positive definite, with positive factors on the blocks that exist.

        A factor ε_j p_nc(α_j) multiplies a CP^{d_j} block, so it is
        irrelevant when d_j = 0.
        """
        facs = [self.base_factors[0]] + [f for f, d in zip(self.base_factors[1:], self.d_js) if d > 0]
        return self.min_eig > 0 and all(f > 0 for f in facs)


def _J_from_profiles(model, xi):
    """Complex structure on covectors, in the (ξ, t) coframe.

    J dξ_j = (Θ_j/Δ_j) Σ_r σ_{r−1}(ξ̂_j) dt_r,  J dt_r = (−1)^r Σ_j ξ_j^{ℓ−r}/Θ_j dξ_j.
    Row a holds the coefficients of J(dx^a).
    """
    ell = len(xi)
    th = thetas(model, xi)
    dl = [mpf(vandermonde_delta(xi, j)) for j in range(ell)]
    S = s_vectors(xi)
    A = mpmath.zeros(2 * ell, 2 * ell)
    for j in range(ell):
        for r in range(ell):
            A[j, ell + r] = th[j] * S[j][r] / dl[j]
            A[ell + r, j] = (-1) ** (r + 1) * xi[j] ** (ell - r - 1) / th[j]
    return A


def _maxabs(M) -> mpmath.mpf:
    return max(abs(M[i, k]) for i in range(M.rows) for k in range(M.cols))


def eval_metric(model, xi, t=None, with_sec: bool = True) -> MetricSample:
    """Fiber metric, complex structure and scalar invariants at ξ.

    Raises
    ------
    DomainError
        If ξ is not strictly interior.
    ChartError
        If neither sign convention for J on vectors is compatible with (g, ω).
    """
    check_interior(model, xi)
    xi = [mpf(x) for x in xi]
    ell = len(xi)
    t = tuple(t) if t is not None else (0,) * ell
    gxx, gtt = fiber_blocks(model, xi)
    G = mpmath.zeros(2 * ell, 2 * ell)
    for j in range(ell):
        G[j, j] = gxx[j]
    for r in range(ell):
        for s in range(ell):
            G[ell + r, ell + s] = gtt[r, s]
    Om = mpmath.zeros(2 * ell, 2 * ell)
    S = s_vectors(xi)
    for j in range(ell):
        for r in range(ell):
            Om[j, ell + r] = S[j][r]
            Om[ell + r, j] = -S[j][r]
    A = _J_from_profiles(model, xi)
    scale = max(_maxabs(G), _maxabs(Om), mpf(1))
    best = None
    # J on vectors is ±A depending on how J acts on forms; ω(X, Y) = g(JX, Y) decides
    for sgn in (1, -1):
        Jv = sgn * A
        res_omega = _maxabs(Jv.T * G - Om) / scale
        if best is None or res_omega < best[1]:
            best = (Jv, res_omega, sgn)
    Jv, res_omega, sgn = best
    res_metric = _maxabs(Jv.T * G * Jv - G) / scale
    res_sq = _maxabs(Jv * Jv + mpmath.eye(2 * ell))
    compat = {"omega": res_omega, "metric": res_metric, "J2": res_sq, "form_sign": sgn}
    if max(res_omega, res_metric, res_sq) > COMPAT_TOL:
        raise ChartError(f"(g, J, ω) incompatible at ξ={xi}: {compat}")
    eig = mpmath.eigsy(G, eigvals_only=True)
    sample = MetricSample(tuple(xi), t, G, Jv, base_factors(model, xi),
                          tuple(gtt[r, r] for r in range(ell))
                          + tuple(gtt[r, s] for r in range(ell) for s in range(r + 1, ell)),
                          min(eig), compat, d_js=tuple(model.roots.d_js))
    if with_sec and ell == 2:
        sample.sec_data = sec_curvature(model, xi)
    return sample


# sectional curvature (ℓ = 2)

def sec_curvature(model, xi) -> dict:
    """Scal, κ, λ and the extremes of f_s over [−1, 1]².

    f_s(t₁, t₂) = t₁² Scal/8 + t₁t₂ λ + t₂² κ/8 + (Scal − κ)/24 is the
    sectional curvature of a plane whose self-dual part makes angle
    arccos t₁ with ω and whose anti-self-dual part has component t₂ along
    the Ricci direction. With D = ξ₁ − ξ₂ and Θ^{(k)}_± = Θ₁^{(k)}(ξ₁) ± Θ₂^{(k)}(ξ₂),

        Scal = −Θ''_−/D,
        κ    = −Θ''_−/D + 6Θ'_+/D² − 12Θ_−/D³,
        λ    = −Θ''_+/(4D) + Θ'_−/(2D²).

    κ and λ were checked against the curvature operator computed directly
    from the metric (see :func:`curvature_operator_blocks`).
    """
    if model.ell != 2:
        raise OracleRegimeError("sectional curvature formulas need ℓ = 2")
    check_interior(model, xi)
    x1, x2 = (mpf(x) for x in xi)
    D = x1 - x2
    T0 = thetas(model, (x1, x2))
    T1 = thetas(model, (x1, x2), 1)
    T2 = thetas(model, (x1, x2), 2)
    scal = -(T2[0] - T2[1]) / D
    kappa = scal + 6 * (T1[0] + T1[1]) / D ** 2 - 12 * (T0[0] - T0[1]) / D ** 3
    lam = -(T2[0] + T2[1]) / (4 * D) + (T1[0] - T1[1]) / (2 * D ** 2)
    A, B, C = scal / 8, kappa / 8, (scal - kappa) / 24

    def fs(u, v):
        return A * u * u + lam * u * v + B * v * v + C

    pts = [(u, v) for u in (-1, 1) for v in (-1, 1)] + [(0, 0)]
    # critical points on the edges of the square
    for u in (-1, 1):
        if B != 0 and abs(lam * u / (2 * B)) <= 1:
            pts.append((u, -lam * u / (2 * B)))
    for v in (-1, 1):
        if A != 0 and abs(lam * v / (2 * A)) <= 1:
            pts.append((-lam * v / (2 * A), v))
    vals = [fs(mpf(u), mpf(v)) for u, v in pts]
    return {"scal": scal, "kappa": kappa, "lambda": lam,
            "fs_min": min(vals), "fs_max": max(vals), "sup_abs": max(abs(v) for v in vals)}


def _metric_4(model, x1, x2):
    gxx, gtt = fiber_blocks(model, (x1, x2))
    M = mpmath.zeros(4, 4)
    M[0, 0], M[1, 1] = gxx
    for r in range(2):
        for c in range(2):
            M[2 + r, 2 + c] = gtt[r, c]
    return M


def _christoffel(model, x, h):
    g = _metric_4(model, *x)
    gi = mpmath.inverse(g)
    dg = []
    for k in range(2):
        e = [0, 0]
        e[k] = h
        dg.append((_metric_4(model, x[0] + e[0], x[1] + e[1])
                   - _metric_4(model, x[0] - e[0], x[1] - e[1])) / (2 * h))
    dg += [mpmath.zeros(4, 4)] * 2     # nothing depends on the angles

    return [[[mpmath.fsum(gi[a, l] * (dg[b][l, c] + dg[c][l, b] - dg[l][b, c]) for l in range(4)) / 2
              for c in range(4)] for b in range(4)] for a in range(4)]


def curvature_operator_blocks(model, xi) -> dict:
    """Curvature of the ℓ = 2 fiber metric computed directly from g.

    Christoffel symbols and their derivatives are central differences in ξ
    at raised precision. Returns Scal, the ω–ω entry of the curvature
    operator, the eigenvalues of its Λ⁻ block, the ω–Λ⁻ coupling, and the
    (κ, |λ|) they imply for f_s. Slow; meant for cross-checks.
    """
    if model.ell != 2:
        raise OracleRegimeError("needs ℓ = 2")
    check_interior(model, xi)
    with mpmath.workprec(max(mpmath.mp.prec, 128) + 64):
        x = [mpf(v) for v in xi]
        sc = max(abs(x[0]), abs(x[1]), mpf(1))
        h1, h2 = mpf("1e-14") * sc, mpf("1e-8") * sc
        g = _metric_4(model, *x)
        G0 = _christoffel(model, x, h1)
        dG = []
        for k in range(2):
            e = [0, 0]
            e[k] = h2
            Gp = _christoffel(model, [x[0] + e[0], x[1] + e[1]], h1)
            Gm = _christoffel(model, [x[0] - e[0], x[1] - e[1]], h1)
            dG.append([[[(Gp[a][b][c] - Gm[a][b][c]) / (2 * h2) for c in range(4)] for b in range(4)]
                       for a in range(4)])

        def d(k, a, b, c):
            return dG[k][a][b][c] if k < 2 else 0

        # R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
        Rup = [[[[d(c, a, dd, b) - d(dd, a, c, b)
                  + mpmath.fsum(G0[a][c][e] * G0[e][dd][b] - G0[a][dd][e] * G0[e][c][b] for e in range(4))
                  for dd in range(4)] for c in range(4)] for b in range(4)] for a in range(4)]
        L = mpmath.cholesky(g)
        E = mpmath.inverse(L).T
        Rl = np.zeros((4, 4, 4, 4))
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for dd in range(4):
                        Rl[a, b, c, dd] = float(mpmath.fsum(g[a, e] * Rup[e][b][c][dd] for e in range(4)))
        En = np.array([[float(E[i, k]) for k in range(4)] for i in range(4)])
        Rf = np.einsum("pqrs,pa,qb,rc,sd->abcd", Rl, En, En, En, En)
        Jv = eval_metric(model, x, with_sec=False).J
        Jf = mpmath.inverse(E) * Jv * E
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    # ⟨R(e_a∧e_b), e_c∧e_d⟩ with sec(e_a, e_b) = R(e_a, e_b, e_a, e_b) ... sign fixed by sec > 0 convention
    Rop = np.array([[-Rf[a, b, dd, c] for (c, dd) in pairs] for (a, b) in pairs])
    w = np.array([float(Jf[b, a]) for (a, b) in pairs])
    w /= np.linalg.norm(w)
    star = {(0, 1): ((2, 3), 1), (0, 2): ((1, 3), -1), (0, 3): ((1, 2), 1),
            (1, 2): ((0, 3), 1), (1, 3): ((0, 2), -1), (2, 3): ((0, 1), 1)}
    S = np.zeros((6, 6))
    for i, p in enumerate(pairs):
        q, sg = star[p]
        S[pairs.index(q), i] = sg
    if np.dot(S @ w, w) < 0:
        S = -S
    U, _, _ = np.linalg.svd((np.eye(6) - S) / 2)
    Bm = U[:, :3]
    ev, vec = np.linalg.eigh(Bm.T @ Rop @ Bm)
    coup = vec.T @ (Bm.T @ Rop @ w)
    scal = 4 * float(w @ Rop @ w)
    return {"scal": scal, "R_omega": float(w @ Rop @ w), "minus_eigs": ev.tolist(),
            "coupling": coup.tolist(), "kappa": 4 * (ev[2] - ev[0]), "abs_lambda": float(np.abs(coup).max()),
            "operator": Rop}


# pluriharmonic chart

_GL_CACHE = {}


def _gl_nodes():
    """12-point Gauss-Legendre nodes and weights on [−1, 1] at working precision."""
    prec = mpmath.mp.prec
    if prec not in _GL_CACHE:
        gl = mpmath.calculus.quadrature.GaussLegendre(mpmath.mp)
        # degree 3 gives 3·2² = 12 nodes; calc_nodes works on [−1, 1]
        _GL_CACHE[prec] = gl.calc_nodes(3, prec)
    return _GL_CACHE[prec]


class ChartMap:
    """y_r(ξ) = −Σ_j ∫_{ξ⁰_j}^{ξ_j} (−1)^r p_c(t) t^{ℓ−r}/F_j(t) dt and H(ξ).

    The base point ξ⁰ fixes the additive constants (y(ξ⁰) = 0, H(ξ⁰) = 0).
    Only fiber terms are kept. Construct once per point; instances are
    read-only afterwards.
    """

    def __init__(self, model, xi0):
        check_interior(model, xi0)
        self.model = model
        self.ell = model.ell
        self.xi0 = [mpf(x) for x in xi0]
        self.room = []
        for j, (lo, hi) in enumerate(model.roots.intervals()):
            self.room.append(min(abs(self.xi0[j] - mpf(lo)), abs(mpf(hi) - self.xi0[j])))

    def _integrals(self, xi, powers):
        out = []
        for j in range(self.ell):
            a, b = self.xi0[j], mpf(xi[j])
            if a == b:
                out.append([mpf(0)] * len(powers))
                continue
            th = lambda s, j=j: self.model.profiles.theta(j, s)
            if abs(b - a) <= mpf("0.01") * self.room[j]:
                # short segment: fixed 12-node rule, error ~ (|b−a|/room)^24
                nodes = [((a + b) + (b - a) * x) / 2 for x, _ in _gl_nodes()]
                wts = [(b - a) * w / 2 for _, w in _gl_nodes()]
                vals = [1 / th(s) for s in nodes]
                out.append([mpmath.fsum(w * s ** k * v for w, s, v in zip(wts, nodes, vals)) for k in powers])
            else:
                out.append([mpmath.quad(lambda s, k=k: s ** k / th(s), [a, b]) for k in powers])
        return out

    def y(self, xi) -> list:
        ell = self.ell
        I = self._integrals(xi, list(range(ell)))
        return [-sum((-1) ** r * I[j][ell - r] for j in range(ell)) for r in range(1, ell + 1)]

    def H(self, xi):
        I = self._integrals(xi, [self.ell])
        return sum(I[j][0] for j in range(self.ell))

    def jacobian(self, xi):
        """∂y_r/∂ξ_j = −(−1)^r ξ_j^{ℓ−r}/Θ_j(ξ_j)."""
        ell = self.ell
        th = thetas(self.model, xi)
        M = mpmath.zeros(ell, ell)
        for r in range(1, ell + 1):
            for j in range(ell):
                M[r - 1, j] = -(-1) ** r * mpf(xi[j]) ** (ell - r) / th[j]
        return M

    def inverse(self, y, guess=None) -> list:
        """Newton solve y(ξ) = y starting from ``guess`` (default ξ⁰)."""
        xi = list(guess) if guess is not None else list(self.xi0)
        target = mpmath.matrix([mpf(v) for v in y])
        for it in range(NEWTON_MAXIT):
            res = mpmath.matrix(self.y(xi)) - target
            err = mpmath.norm(res, mpmath.inf)
            if err <= NEWTON_TOL * 1e-10:
                return xi
            step = mpmath.lu_solve(self.jacobian(xi), res)
            xi = [xi[j] - step[j] for j in range(self.ell)]
            check_interior(self.model, xi)
            if mpmath.norm(step, mpmath.inf) <= NEWTON_TOL * 1e-10 * _scale(self.model):
                return xi
        raise ChartError(f"Newton inversion did not converge in {NEWTON_MAXIT} iterations (|res|={err})")


def _cr_sign(model, chart, sample) -> tuple:
    """Sign s with z_r = y_r + i s t_r holomorphic: dy_r∘J = −s dt_r."""
    ell = model.ell
    Y = chart.jacobian(sample.xi)
    Jv = sample.J
    errs = {}
    for s in (1, -1):
        e = mpf(0)
        for r in range(ell):
            row = [Y[r, j] for j in range(ell)] + [0] * ell
            comp = [sum(row[a] * Jv[a, b] for a in range(2 * ell)) for b in range(2 * ell)]
            target = [0] * (2 * ell)
            target[ell + r] = -s
            nrm = max(abs(v) for v in row) or 1
            e = max(e, max(abs(comp[b] - target[b]) for b in range(2 * ell)) / max(nrm, 1))
        errs[s] = e
    s = min(errs, key=errs.get)
    if errs[s] > CR_TOL:
        raise ChartError(f"Cauchy-Riemann check failed for both sign variants: {errs}")
    return s, errs


def _G_analytic(chart, xi):
    """∂∂̄H = ¼ ∂σ/∂y = ¼ S Y⁻¹ from the chart Jacobian (values of Θ only)."""
    ell = chart.ell
    S = s_vectors(xi)
    Smat = mpmath.matrix([[S[j][r] for j in range(ell)] for r in range(ell)])   # ∂σ_r/∂ξ_j
    M = Smat * mpmath.inverse(chart.jacobian(xi))
    return (M + M.T) / 8


def _hessian_y(f, chart, h):
    """Richardson-extrapolated central-difference Hessian of f(ξ(y)) at y = 0.

    Returns (Hessian, values cache). Error model O(h⁴).
    """
    ell = chart.ell

    cache = {}

    def at(vec):
        key = tuple(vec)
        if key not in cache:
            y = [mpf(v) for v in vec]
            cache[key] = f(chart.inverse(y, guess=_linear_guess(chart, y)))
        return cache[key]

    def hess(step):
        Hm = mpmath.zeros(ell, ell)
        e = [[step if i == k else 0 for i in range(ell)] for k in range(ell)]
        f0 = at([0] * ell)
        for r in range(ell):
            fp = at(e[r])
            fm = at([-v for v in e[r]])
            Hm[r, r] = (fp - 2 * f0 + fm) / step ** 2
            for s in range(r + 1, ell):
                pp = at([a + b for a, b in zip(e[r], e[s])])
                pm = at([a - b for a, b in zip(e[r], e[s])])
                mp_ = at([-a + b for a, b in zip(e[r], e[s])])
                mm = at([-a - b for a, b in zip(e[r], e[s])])
                Hm[r, s] = Hm[s, r] = (pp - pm - mp_ + mm) / (4 * step ** 2)
        return Hm

    H1 = hess(h)
    H2 = hess(h / 2)
    return (4 * H2 - H1) / 3


def _linear_guess(chart, y):
    step = mpmath.lu_solve(chart.jacobian(chart.xi0), mpmath.matrix(y))
    return [chart.xi0[j] + step[j] for j in range(chart.ell)]


def _fd_step(model, chart, xi):
    """10⁻⁴ × local y-scale, small enough to keep the stencil inside 𝒟."""
    Yinv = mpmath.inverse(chart.jacobian(xi))
    room = []
    for j, (lo, hi) in enumerate(model.roots.intervals()):
        d = min(abs(xi[j] - mpf(lo)), abs(mpf(hi) - xi[j]))
        room.append(min(d, 1 + abs(xi[j])))
    return mpf("1e-4") * min(room) / max(mpmath.norm(Yinv, mpmath.inf), mpf("1e-30"))


def ricci_oracle(model, xi, return_parts: bool = False):
    """Finite-difference residual of Ric + q_ℓ ω = i∂∂̄(aσ₁ + d_B log σ_ℓ).

    Returns the ℓ×ℓ residual matrix R + q_ℓ h − W in z-coordinates (or a
    dict of all parts if ``return_parts``). Valid for ℓ = 2, d = (0, 0).
    """
    roots = model.roots
    if model.ell != 2 or any(roots.d_js):
        raise OracleRegimeError("Ricci oracle needs ℓ = 2 and d = (0, 0)")
    xi = [mpf(x) for x in xi]
    sample = eval_metric(model, xi, with_sec=False)
    chart = ChartMap(model, xi)
    s, cr = _cr_sign(model, chart, sample)
    h = _fd_step(model, chart, xi)
    cfg = model.config
    a = mpf(model.a)

    def logdetG(x):
        return mpmath.log(mpmath.det(_G_analytic(chart, x)))

    def w(x):
        sg = sigma(x)
        return a * sg[0] + cfg.d_B * mpmath.log(sg[-1])

    R = -_hessian_y(logdetG, chart, h) / 4
    W = _hessian_y(w, chart, h) / 4
    G = _G_analytic(chart, xi)
    res = R + cfg.q_ell * KAHLER_FORM_FACTOR * G - W
    if return_parts:
        return {"residual": res, "R": R, "G": G, "W": W, "cr_sign": s, "cr_error": cr[s], "step": h,
                "max_norm": _maxabs(res)}
    return res


def potential_consistency(model, xi) -> mpmath.mpf:
    """max |¼ Hess_y H − G| / max |G|, with G taken from eval_metric's g_tt.

    In z = y ± it the metric g_tt transported to y equals Hess_y H, so
    ∂∂̄H = ¼ g_tt. The Hessian here is a finite difference of H itself.
    """
    xi = [mpf(x) for x in xi]
    chart = ChartMap(model, xi)
    h = _fd_step(model, chart, xi)
    Hy = _hessian_y(chart.H, chart, h) / 4
    _, gtt = fiber_blocks(model, xi)
    return _maxabs(Hy - gtt / 4) / _maxabs(gtt / 4)


def interior_points(model, n: int, seed: int = 0, spread: float = 4.0) -> list:
    """Deterministic interior sample points (away from the boundary)."""
    rng = np.random.default_rng(seed)
    pts = []
    ivs = model.roots.intervals()
    sc = float(_scale(model))
    for _ in range(n):
        p = []
        for lo, hi in ivs:
            u = rng.uniform(0.05, 0.95)
            if lo == -mpmath.inf:
                p.append(mpf(hi) - sc * mpf(10 ** (u * math.log10(spread * 10))) * mpf("0.1"))
            elif hi == mpmath.inf:
                p.append(mpf(lo) + sc * mpf(10 ** (u * math.log10(spread * 10))) * mpf("0.1"))
            else:
                p.append(mpf(lo) + (mpf(hi) - mpf(lo)) * u)
        pts.append(p)
    return pts


# distances and volumes

def _exponent(model):
    beta = model.profiles.beta
    bm = model.profiles.beta_minus
    ell = model.ell
    for b in (beta, bm):
        if b is not None and (not mpmath.isfinite(b) or b >= ell + 1):
            raise IncompleteMetricError(f"profile degree {b} ≥ ℓ+1 = {ell + 1}: the metric is incomplete")
    return mpf(ell + 1 - beta) / 2


def _quad_sing(f, a, b):
    # tanh-sinh handles the integrable endpoint singularity at α
    a, b = mpf(a), mpf(b)
    if a == b:
        return mpf(0)
    sgn = 1 if b > a else -1
    lo, hi = (a, b) if b > a else (b, a)
    pts = [lo]
    if hi - lo > 10 * (abs(lo) + 1):
        k = lo + (abs(lo) + 1)
        while k < hi:
            pts.append(k)
            k = lo + 4 * (k - lo)
    pts.append(hi)
    return sgn * mpmath.quad(f, pts, method="tanh-sinh")


def lower_distance(model, end: int, x) -> mpmath.mpf:
    """∫ √((s − α)^{ℓ−1}/|Θ|) ds from the root α at the unbounded end to x.

    end = +1 uses Θ_ℓ from α_ℓ; end = −1 uses Θ_1 from α_1 (Type 2).
    """
    ell = model.ell
    ps = model.profiles
    j = ell - 1 if end > 0 else 0
    al = mpf(model.alphas[j])

    def f(s):
        return mpmath.sqrt(abs(s - al) ** (ell - 1) / abs(ps.theta(j, s)))

    return abs(_quad_sing(f, al, x))


def _path_length_1d(model, j, xi, start, stop):
    """g_ξ length of the segment moving ξ_j from start to stop, others fixed."""
    ps = model.profiles

    def f(s):
        pt = list(xi)
        pt[j] = s
        return mpmath.sqrt(abs(mpf(vandermonde_delta(pt, j)) / ps.theta(j, s)))

    return abs(_quad_sing(f, start, stop))


def distance_bounds(model, xi_target) -> dict:
    """Lower and upper bounds for the distance to the zero-section stratum.

    The lower bound is the completeness integral from the proof; the upper
    bound is the length of the broken ξ-path which first moves ξ_ℓ from α_ℓ
    (and, for Type 2, then ξ_1 from α_1) with all angles fixed. The base
    diameter constant is taken to be 0.
    """
    check_interior(model, xi_target)
    p = _exponent(model)
    xi = [mpf(x) for x in xi_target]
    ell = model.ell
    lower = lower_distance(model, +1, xi[-1])
    if model.roots.case == TYPE1:
        start = list(xi)
        start[-1] = mpf(model.alphas[-1])
        upper = _path_length_1d(model, ell - 1, start, start[-1], xi[-1])
    else:
        lower = max(lower, lower_distance(model, -1, xi[0]))
        pt = list(xi)
        pt[0] = mpf(model.alphas[0])
        upper = _path_length_1d(model, ell - 1, pt, mpf(model.alphas[-1]), xi[-1])
        upper += _path_length_1d(model, 0, xi, mpf(model.alphas[0]), xi[0])
    return {"lower": lower, "upper": upper, "exponent": p}


def comparison_volume(model, X) -> mpmath.mpf:
    """Comparison volume of {ξ_ℓ ≤ X (and ξ_1 ≥ −X)}.

    Type 1: ∫_{α_ℓ}^X ξ^{n−1} dξ. Type 2: the double integral of
    ξ_1^{n−1}ξ_ℓ^{n−2} − ξ_1^{n−2}ξ_ℓ^{n−1} over [−X, α_1] × [α_ℓ, X].
    """
    n = model.config.n
    X = mpf(X)
    al = model.alphas
    if model.roots.case == TYPE1:
        a = mpf(al[-1])
        return (X ** n - a ** n) / n
    a1, al_ = mpf(al[0]), mpf(al[-1])

    def I(k, lo, hi):
        return (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)

    return I(n - 1, -X, a1) * I(n - 2, al_, X) - I(n - 2, -X, a1) * I(n - 1, al_, X)


def _distance_profile(model, X):
    if model.roots.case == TYPE1:
        return lower_distance(model, +1, X)
    return max(lower_distance(model, +1, X), lower_distance(model, -1, -X))


def volume_exponent(model, npts: int = 16, decades: float = 2.0) -> dict:
    """Analytic volume exponent and the log-log slope of comparison volume vs R.

    R(X) is the completeness integral evaluated at ξ_ℓ = X (and ξ_1 = −X);
    the regression runs over ``decades`` decades of R starting at
    X₀ = 100·max|α|.
    """
    p = _exponent(model)
    analytic = model.growth.get("volume")
    sc = _scale(model)
    X0 = 100 * sc
    R0 = _distance_profile(model, X0)
    X1 = X0 * mpf(10) ** (decades / p)
    while _distance_profile(model, X1) < R0 * mpf(10) ** decades:
        X1 *= 2
    Xs = [X0 * (X1 / X0) ** (mpf(k) / (npts - 1)) for k in range(npts)]
    R = [float(mpmath.log(_distance_profile(model, X))) for X in Xs]
    V = [float(mpmath.log(comparison_volume(model, X))) for X in Xs]
    slope = float(np.polyfit(R, V, 1)[0])
    ana = float(analytic) if analytic is not None else None
    return {"analytic": analytic, "slope": slope,
            "error": abs(slope - ana) if ana is not None else None,
            "R": [math.exp(v) for v in R], "volume": [math.exp(v) for v in V], "X": Xs}


def curvature_decay_scan(model, xi1=None, X0=None, decades: int = 3, per_decade: int = 5,
                         powers=(1, 2)) -> dict:
    """sup |sec| along the ray ξ_2 → ∞ with ξ_1 fixed, times d^p.

    d is the lower completeness distance. For each p the ratio
    max/min of sup|sec|·d^p over the last sampled decade is reported;
    ``bounded[p]`` is True when it stays below 1.2.
    """
    if model.ell != 2:
        raise OracleRegimeError("curvature scan needs ℓ = 2")
    ivs = model.roots.intervals()
    lo, hi = ivs[0]
    if xi1 is None:
        xi1 = (mpf(lo) + mpf(hi)) / 2 if lo != -mpmath.inf else mpf(hi) - _scale(model)
    sc = _scale(model)
    X0 = mpf(X0) if X0 is not None else 10 * sc
    n = decades * per_decade + 1
    rows = []
    for k in range(n):
        X = X0 * mpf(10) ** (mpf(k) / per_decade)
        xi = (mpf(xi1), X)
        sec = sec_curvature(model, xi)
        kn = k_norms(model, xi)
        d = distance_bounds(model, xi)
        rows.append({"xi2": X, "sup_sec": sec["sup_abs"], "d_lower": d["lower"], "d_upper": d["upper"],
                     "k_norms": kn, **{f"sec_d{p}": sec["sup_abs"] * d["lower"] ** p for p in powers}})
    last = rows[-(per_decade + 1):]
    ratios, bounded = {}, {}
    for p in powers:
        vals = [r[f"sec_d{p}"] for r in last]
        ratios[p] = float(max(vals) / min(vals)) if min(vals) > 0 else math.inf
        bounded[p] = ratios[p] < 1.2
    return {"rows": rows, "ratios": ratios, "bounded": bounded, "xi1": xi1}
