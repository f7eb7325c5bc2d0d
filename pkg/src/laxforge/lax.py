"""The 2x2 spectral matrix of a system and its per-flow companions.

The matrix L collects three spectral polynomials: the monic position
polynomial u whose roots are the separation coordinates, the momentum
polynomial v, and the lower-left entry w produced by dividing the curve
function by u.  Each flow k gets a companion matrix U_k obtained by dividing a
truncation-weighted copy of L by u and keeping the quotient parts.  The
spectral determinant and gauge conjugation complete the layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .algebra import (
    CoeffPoly,
    Rat,
    SpectralPoly,
    VarTable,
    divmod_spectral,
    invert_unit,
    phase_space_table,
)
from .benenti import BenentiSpec, basic_potential

__all__ = [
    "LaxMatrix",
    "u_poly",
    "u_leading",
    "v_poly",
    "w_poly",
    "curve_division",
    "lax_matrix",
    "flow_matrix",
    "spectral_determinant",
    "gauge_transform",
]

_HALF = Rat(1) / 2


@dataclass(frozen=True)
class LaxMatrix:
    """2x2 matrix of spectral polynomials over one shared variable table."""

    e11: SpectralPoly
    e12: SpectralPoly
    e21: SpectralPoly
    e22: SpectralPoly

    def __post_init__(self):
        t = self.e11.vars
        for e in (self.e12, self.e21, self.e22):
            if e.vars is not t and e.vars != t:
                raise ValueError("matrix entries use different variable tables")

    @property
    def table(self) -> VarTable:
        return self.e11.vars

    def entries(self) -> tuple[SpectralPoly, SpectralPoly, SpectralPoly, SpectralPoly]:
        return (self.e11, self.e12, self.e21, self.e22)

    def trace(self) -> SpectralPoly:
        return self.e11 + self.e22

    @property
    def is_traceless(self) -> bool:
        return self.trace().is_zero

    def __matmul__(self, other: "LaxMatrix") -> "LaxMatrix":
        return LaxMatrix(
            self.e11 * other.e11 + self.e12 * other.e21,
            self.e11 * other.e12 + self.e12 * other.e22,
            self.e21 * other.e11 + self.e22 * other.e21,
            self.e21 * other.e12 + self.e22 * other.e22,
        )

    def commutator(self, other: "LaxMatrix") -> "LaxMatrix":
        return self @ other - other @ self

    def __add__(self, other: "LaxMatrix") -> "LaxMatrix":
        return LaxMatrix(self.e11 + other.e11, self.e12 + other.e12,
                         self.e21 + other.e21, self.e22 + other.e22)

    def __sub__(self, other: "LaxMatrix") -> "LaxMatrix":
        return LaxMatrix(self.e11 - other.e11, self.e12 - other.e12,
                         self.e21 - other.e21, self.e22 - other.e22)

    def __mul__(self, factor) -> "LaxMatrix":
        return LaxMatrix(self.e11 * factor, self.e12 * factor,
                         self.e21 * factor, self.e22 * factor)

    __rmul__ = __mul__

    def __neg__(self) -> "LaxMatrix":
        return LaxMatrix(-self.e11, -self.e12, -self.e21, -self.e22)

    def eval(self, point, lam: float):
        return (
            (self.e11.eval(point, lam), self.e12.eval(point, lam)),
            (self.e21.eval(point, lam), self.e22.eval(point, lam)),
        )

    def to_json(self) -> dict:
        return {
            "e11": self.e11.to_json(),
            "e12": self.e12.to_json(),
            "e21": self.e21.to_json(),
            "e22": self.e22.to_json(),
        }

    @classmethod
    def from_json(cls, vars: VarTable, data: dict) -> "LaxMatrix":
        return cls(*(SpectralPoly.from_json(vars, data[key])
                     for key in ("e11", "e12", "e21", "e22")))

    def format(self, sym: str = "l", indent: str = "  ") -> str:
        labels = ("(1,1)", "(1,2)", "(2,1)", "(2,2)")
        return "\n".join(
            f"{indent}{lab}: {e.format(sym)}" for lab, e in zip(labels, self.entries())
        )


@lru_cache(maxsize=None)
def u_poly(n: int) -> SpectralPoly:
    """Monic position polynomial of degree n with coefficients 1, q_1..q_n."""
    table = phase_space_table(n)
    coeffs = {n: CoeffPoly.const(table, 1)}
    for k in range(1, n + 1):
        coeffs[n - k] = CoeffPoly.variable(table, f"q{k}")
    return SpectralPoly._raw(table, coeffs)


@lru_cache(maxsize=None)
def u_leading(n: int, k: int) -> SpectralPoly:
    """Quotient part of u divided by the (n-k+1)-th power of the spectral
    parameter: the closed form sum_{s=0}^{k-1} q_s l^{k-1-s} with q_0 = 1."""
    if not 1 <= k <= n:
        raise ValueError(f"flow index {k} out of range 1..{n}")
    table = phase_space_table(n)
    coeffs = {k - 1: CoeffPoly.const(table, 1)}
    for s in range(1, k):
        coeffs[k - 1 - s] = CoeffPoly.variable(table, f"q{s}")
    return SpectralPoly._raw(table, coeffs)


@lru_cache(maxsize=None)
def v_poly(n: int, r: int) -> SpectralPoly:
    """Momentum polynomial of degree <= n-1; its coefficients mix the momenta
    through the basic potentials at exponents shifted by r."""
    table = phase_space_table(n)
    p = [CoeffPoly.variable(table, f"p{j + 1}") for j in range(n)]

    def pot_dot_p(gamma: int) -> CoeffPoly:
        acc = CoeffPoly.zero(table)
        for j in range(n):
            acc = acc + basic_potential(n, gamma)[j] * p[j]
        return acc

    coeffs = {}
    for k in range(1, n + 1):
        c = CoeffPoly.zero(table)
        for s in range(k):
            c = c + _qcoef(table, s) * pot_dot_p(r + k - s - 1)
        if not c.is_zero:
            coeffs[n - k] = c
    return SpectralPoly._raw(table, coeffs)


def _qcoef(table: VarTable, j: int) -> CoeffPoly:
    return CoeffPoly.const(table, 1) if j == 0 else CoeffPoly.variable(table, f"q{j}")


def curve_division(spec: BenentiSpec) -> tuple[SpectralPoly, SpectralPoly]:
    """Divide the curve function (1/2) l^{m-2r} v^2 - sigma by u.

    Returns (quotient, remainder).  The remainder reproduces the Hamiltonians
    as coefficients of l^{n-1}..l^0, and -2 l^{2r-m} times the quotient is w;
    both facts are exercised by the checks.
    """
    n, m, r = spec.n, spec.m, spec.r
    v = v_poly(n, r)
    F = (v * v * _HALF).shift(m - 2 * r) - spec.sigma_poly()
    return divmod_spectral(F, u_poly(n))


def w_poly(spec: BenentiSpec) -> SpectralPoly:
    """Lower-left entry: kinetic part from dividing the shifted square of v
    by u, potential part from dividing sigma by u, recombined with the exact
    exponent shift by 2r - m."""
    n, m, r = spec.n, spec.m, spec.r
    u = u_poly(n)
    v = v_poly(n, r)
    vsq = (v * v).shift(m - 2 * r)
    w_kin = -divmod_spectral(vsq, u)[0].shift(2 * r - m)
    w_pot = 2 * divmod_spectral(spec.sigma_poly(), u)[0].shift(2 * r - m)
    return w_kin + w_pot


@lru_cache(maxsize=128)
def lax_matrix(spec: BenentiSpec) -> LaxMatrix:
    """Assemble the 2x2 matrix (v, u; w, -v) for one system."""
    v = v_poly(spec.n, spec.r)
    return LaxMatrix(v, u_poly(spec.n), w_poly(spec), -v)


@lru_cache(maxsize=256)
def flow_matrix(spec: BenentiSpec, k: int) -> LaxMatrix:
    """Companion matrix of the k-th flow: entrywise quotient by u of
    (1/2) l^{m-r} t_k L, where t_k is the degree-(k-1) truncation of u."""
    if not 1 <= k <= spec.n:
        raise ValueError(f"flow index {k} out of range 1..{spec.n}")
    L = lax_matrix(spec)
    u = u_poly(spec.n)
    fac = (u_leading(spec.n, k) * _HALF).shift(spec.m - spec.r)
    a = divmod_spectral(fac * L.e11, u)[0]
    b = divmod_spectral(fac * L.e12, u)[0]
    c = divmod_spectral(fac * L.e21, u)[0]
    return LaxMatrix(a, b, c, -a)


def spectral_determinant(L: LaxMatrix, r: int) -> SpectralPoly:
    """Determinant of L minus l^r mu times the identity, expanded exactly."""
    table = L.table
    s = SpectralPoly.of(CoeffPoly.variable(table, "mu"), r)
    return (L.e11 - s) * (L.e22 - s) - L.e12 * L.e21


def _coerce_omega(table: VarTable, omega) -> LaxMatrix:
    if isinstance(omega, LaxMatrix):
        return omega
    (a, b), (c, d) = omega

    def lift(x):
        if isinstance(x, SpectralPoly):
            return x
        if isinstance(x, CoeffPoly):
            return SpectralPoly.of(x)
        return SpectralPoly(table, {0: CoeffPoly.const(table, x)})

    return LaxMatrix(lift(a), lift(b), lift(c), lift(d))


def gauge_transform(L: LaxMatrix, U: LaxMatrix, omega, omega_t=None) -> tuple[LaxMatrix, LaxMatrix]:
    """Conjugate a matrix pair: L' = O L O^{-1}, U' = O U O^{-1} + O_t O^{-1}.

    The conjugating matrix must be free of the spectral parameter with a
    determinant that is a unit of the localized ring; anything else raises
    DivisionError.  omega_t is the flow derivative of omega (zero if omitted).
    """
    table = L.table
    O = _coerce_omega(table, omega)
    for e in O.entries():
        if e.coeffs and (e.min_exp() != 0 or e.degree() != 0):
            raise ValueError("conjugating matrix must not involve the spectral parameter")
    det = O.e11 * O.e22 - O.e12 * O.e21
    inv_c = invert_unit(det.coeff(0))  # names the blocking value if not invertible
    inv = SpectralPoly.of(inv_c)
    Oinv = LaxMatrix(O.e22 * inv, -O.e12 * inv, -O.e21 * inv, O.e11 * inv)
    Lp = O @ L @ Oinv
    Up = O @ U @ Oinv
    if omega_t is not None:
        Ot = _coerce_omega(table, omega_t)
        Up = Up + (Ot @ Oinv)
    return Lp, Up
