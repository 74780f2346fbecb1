"""Exact univariate polynomial algebra and the discrete degree identities.

Coefficients are :class:`fractions.Fraction` whenever the inputs are
rational, in which case every operation here is exact. The same class also
accepts ``mpmath.mpf`` coefficients once a solver has coupled in
transcendental data (exponential weights), so that profile polynomials can
share one representation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import prod
from typing import Iterable, Sequence

import mpmath

TYPE1 = "type1"
TYPE2 = "type2"


class InterpolationError(ValueError):
    pass


class RootError(ValueError):
    pass


class InvariantViolation(ArithmeticError):
    pass


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


def as_exact(x):
    """Convert ints and decimal strings to Fraction; leave others untouched."""
    if isinstance(x, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return x


class Poly:
    """Univariate polynomial, coefficients in ascending powers.

    Parameters
    ----------
    coeffs : iterable
        ``coeffs[k]`` multiplies ``t**k``. Trailing zeros are stripped so the
        leading coefficient is nonzero unless the polynomial is zero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_exact(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots: Sequence, mults: Sequence[int] | None = None) -> "Poly":
        mults = mults or [1] * len(roots)
        p = cls([1])
        for r, m in zip(roots, mults):
            for _ in range(m):
                p = p * cls([-as_exact(r), 1])
        return p

    # basic structure
    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs)

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def lead(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    # arithmetic
    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        return self + (-other if isinstance(other, Poly) else Poly([-as_exact(other)]))

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = as_exact(other)
            return Poly(c * other for c in self.coeffs)
        if self.is_zero or other.is_zero:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        out = Poly([1])
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        """Long division; exact for Fraction coefficients."""
        if other.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        dq = other.degree
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        lead = other.lead()
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] / lead
            quot[k - dq] = c
            for i, b in enumerate(other.coeffs):
                rem[k - dq + i] = rem[k - dq + i] - c * b
        return Poly(quot), Poly(rem[:dq])

    def deriv(self, k: int = 1) -> "Poly":
        p = self
        for _ in range(k):
            p = Poly(i * c for i, c in enumerate(p.coeffs) if i > 0)
        return p

    def antideriv(self) -> "Poly":
        """Antiderivative vanishing at 0."""
        out = [Fraction(0)]
        for i, c in enumerate(self.coeffs):
            out.append(c / (i + 1) if _is_exact(c) else c / mpmath.mpf(i + 1))
        return Poly(out)

    def integrate(self, lo, hi):
        A = self.antideriv()
        return A(hi) - A(lo)

    def shift_power(self, k: int) -> "Poly":
        """Multiply by t**k."""
        return Poly([0] * k + list(self.coeffs))

    def __call__(self, x):
        x = as_exact(x)
        acc = Fraction(0) if _is_exact(x) else mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_mpf(self) -> "Poly":
        return Poly(mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpmath.mpf(c)
                    for c in self.coeffs)


# public alias
ExactPoly = Poly


def elem_symmetric(values: Sequence, r: int):
    """r-th elementary symmetric function of ``values``."""
    n = len(values)
    if r < 0 or r > n:
        raise ValueError(f"r={r} out of range for {n} values")
    # e_k recursion avoids the combinatorial sum
    e = [Fraction(1)] + [Fraction(0)] * r
    for v in values:
        for k in range(r, 0, -1):
            e[k] = e[k] + v * e[k - 1]
    return e[r]


def elem_symmetric_hat(values: Sequence, r: int, j: int):
    """σ_r of ``values`` with entry ``j`` (0-based) omitted."""
    return elem_symmetric([v for i, v in enumerate(values) if i != j], r)


def vandermonde_delta(values: Sequence, j: int):
    """Δ(α_j) = Π_{i≠j} (α_j − α_i)."""
    return prod((values[j] - v for i, v in enumerate(values) if i != j), start=Fraction(1))


def hermite_interpolate(constraints: Sequence[tuple], degree_bound: int) -> Poly:
    """Unique polynomial of degree ≤ ``degree_bound`` with prescribed derivatives.

    Parameters
    ----------
    constraints : sequence of (node, order, value)
        Each fixes ``P^{(order)}(node) = value``.
    degree_bound : int

    Returns
    -------
    Poly
    """
    if len(constraints) != degree_bound + 1:
        raise InterpolationError(
            f"{len(constraints)} constraints for degree bound {degree_bound}")
    seen = set()
    for node, order, _ in constraints:
        key = (as_exact(node), order)
        if key in seen:
            raise InterpolationError(f"duplicate constraint at node {node}, order {order}")
        seen.add(key)
    n = degree_bound + 1
    rows = []
    for node, order, value in constraints:
        node = as_exact(node)
        row = []
        for k in range(n):
            if k < order:
                row.append(Fraction(0))
            else:
                fall = prod(range(k - order + 1, k + 1), start=1)
                row.append(fall * node ** (k - order))
        rows.append(row + [as_exact(value)])
    sol = solve_linear(rows)
    if sol is None:
        raise InterpolationError("singular confluent Vandermonde system")
    return Poly(sol)


def solve_linear(aug: list[list]) -> list | None:
    """Gauss-Jordan on an augmented matrix; exact for Fractions.

    Returns None if singular. Pivots on the largest magnitude entry, which
    only matters for floating coefficients.
    """
    A = [list(r) for r in aug]
    n = len(A)
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(A[i][col]))
        if A[piv][col] == 0:
            return None
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for i in range(n):
            if i != col and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[col])]
    return [A[i][n] for i in range(n)]


@dataclass(frozen=True)
class RootTuple:
    """Strictly increasing roots α₁ < … < α_ℓ with their case and multiplicities.

    Type 1 needs α₁ > 0; Type 2 needs α_{ℓ-1} < 0 < α_ℓ and d_ℓ = 0.
    """

    alphas: tuple
    case: str = TYPE1
    d_js: tuple = field(default=())
    min_gap: float = 1e-8

    def __post_init__(self):
        al = tuple(as_exact(a) for a in self.alphas)
        if any(isinstance(a, mpmath.mpf) for a in al):
            # mixed exact/floating input: promote so comparisons are defined
            al = tuple(a if isinstance(a, mpmath.mpf) else mpmath.mpf(a.numerator) / a.denominator
                       if isinstance(a, Fraction) else mpmath.mpf(a) for a in al)
        object.__setattr__(self, "alphas", al)
        d = tuple(self.d_js) if self.d_js else (0,) * len(al)
        object.__setattr__(self, "d_js", d)
        if len(d) != len(al):
            raise RootError("d_js length must match alphas")
        if any(x < 0 for x in d):
            raise RootError("d_j must be nonnegative")
        for i in range(len(al) - 1):
            if not al[i] < al[i + 1]:
                raise RootError(f"roots not strictly increasing at positions {i + 1},{i + 2}")
            if float(al[i + 1] - al[i]) < self.min_gap:
                raise RootError(f"roots α_{i + 1}, α_{i + 2} closer than {self.min_gap}")
        if self.case == TYPE1:
            if al[0] <= 0:
                raise RootError("Type 1 requires α₁ > 0")
        elif self.case == TYPE2:
            if len(al) < 2 or not (al[-2] < 0 < al[-1]):
                raise RootError("Type 2 requires α_{ℓ-1} < 0 < α_ℓ")
            if d[-1] != 0:
                raise RootError("Type 2 forces d_ℓ = 0")
        else:
            raise RootError(f"unknown case {self.case!r}")

    @property
    def ell(self) -> int:
        return len(self.alphas)

    def intervals(self) -> list[tuple]:
        """Open intervals I_1..I_ℓ; infinite ends are ±mpmath.inf."""
        al = self.alphas
        ell = self.ell
        if self.case == TYPE1:
            return [(al[j], al[j + 1]) for j in range(ell - 1)] + [(al[-1], mpmath.inf)]
        out = [(-mpmath.inf, al[0])]
        out += [(al[j - 1], al[j]) for j in range(1, ell - 1)]
        out.append((al[-1], mpmath.inf))
        return out

    def p_c(self) -> Poly:
        return Poly.from_roots(self.alphas, self.d_js)


def vandermonde_check(roots: RootTuple | Sequence) -> list[list]:
    """M_sr = Σ_j σ_{s-1}(α̂_j)/Δ(α_j) · (−1)^{r-1} α_j^{ℓ-r}, minus the identity."""
    al = roots.alphas if isinstance(roots, RootTuple) else tuple(as_exact(a) for a in roots)
    ell = len(al)
    for i, j in combinations(range(ell), 2):
        if al[i] == al[j]:
            raise ZeroDivisionError(f"repeated root α_{i + 1} = α_{j + 1}")
    deltas = [vandermonde_delta(al, j) for j in range(ell)]
    M = []
    for s in range(1, ell + 1):
        row = []
        for r in range(1, ell + 1):
            acc = sum((elem_symmetric_hat(al, s - 1, j) / deltas[j]
                       * (-1) ** (r - 1) * al[j] ** (ell - r) for j in range(ell)), Fraction(0))
            row.append(acc - (1 if s == r else 0))
        M.append(row)
    return M


def partial_degree(q: Poly, roots: RootTuple, j: int):
    """δ_j = q(α_j) σ_{ℓ-1}(α̂_j) / ((d_j+1) Δ(α_j)); ``j`` is 0-based."""
    al = roots.alphas
    return (q(al[j]) * elem_symmetric_hat(al, len(al) - 1, j)
            / ((roots.d_js[j] + 1) * vandermonde_delta(al, j)))


@dataclass(frozen=True)
class TotalDegree:
    direct: object
    closed_form: object
    displayed_form: object

    @property
    def value(self):
        return self.direct


def total_degree(q: Poly, roots: RootTuple, tol=None) -> TotalDegree:
    """Total degree δ = Σ (d_j+1) δ_j, checked against q_ℓ σ_ℓ + (−1)^{ℓ-1} q(0).

    The alternative form (−1)^ℓ (q_ℓ σ_ℓ − q(0)) is also returned; it agrees
    with the direct sum only for even ℓ or q_ℓ = 0.

    Raises
    ------
    InvariantViolation
        If the direct sum and the closed form disagree (exactly, or beyond
        ``tol`` for floating inputs).
    """
    al = roots.alphas
    ell = len(al)
    direct = sum(((roots.d_js[j] + 1) * partial_degree(q, roots, j) for j in range(ell)), Fraction(0))
    q_ell = q.coeff(ell)
    s_ell = elem_symmetric(al, ell)
    closed = q_ell * s_ell + (-1) ** (ell - 1) * q(0)
    displayed = (-1) ** ell * (q_ell * s_ell - q(0))
    exact = q.is_exact and all(_is_exact(a) for a in al)
    if exact:
        if direct != closed:
            raise InvariantViolation(f"total degree: direct {direct} != closed form {closed}")
    else:
        tol = 1e-20 if tol is None else tol
        scale = max(1, abs(closed))
        if abs(direct - closed) > tol * scale:
            raise InvariantViolation(f"total degree: direct {direct} != closed form {closed}")
    return TotalDegree(direct, closed, displayed)
