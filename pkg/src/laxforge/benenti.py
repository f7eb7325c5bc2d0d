"""Separable-system construction in symmetric-function coordinates.

A system is fixed by (n, m, r, sigma): n degrees of freedom, a kinetic
exponent m, a normalization exponent r used by the matrix layer, and a Laurent
polynomial sigma supplying the potential.  From these the module builds the
basic potential vectors by an exact recursion, the contravariant metric, the
Killing tensors, and the n Hamiltonians, all as exact polynomials in
(q_1..q_n, p_1..p_n) with q_n allowed in denominators.

The numeric side provides the canonical map from separation coordinates
(lambda_i, mu_i) to (q, p) and a float oracle that recovers the Hamiltonian
values from the defining linear system, independent of all symbolic code.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import CoeffPoly, Rat, SpectralPoly, VarTable, phase_space_table

__all__ = [
    "BenentiSpec",
    "SeparationPoint",
    "basic_potential",
    "metric_tensor",
    "killing_tensor",
    "hamiltonians",
    "viete_map",
    "oracle_hamiltonians",
    "sample_separation_point",
    "sample_phase_point",
]


@dataclass(frozen=True)
class BenentiSpec:
    """Defining data (n, m, r, sigma) of one separable system.

    sigma is stored as a tuple of (exponent, coefficient) pairs with distinct
    exponents and nonzero Fraction coefficients, sorted by falling exponent so
    equal specs compare and hash equal.
    """

    n: int
    m: int = 0
    r: int = 0
    sigma: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not isinstance(self.m, int) or not isinstance(self.r, int):
            raise ValueError("m and r must be integers")
        clean = []
        for gamma, c in self.sigma:
            c = Fraction(c)
            if c != 0:
                clean.append((int(gamma), c))
        clean.sort(key=lambda t: -t[0])
        if len({g for g, _ in clean}) != len(clean):
            raise ValueError("duplicate sigma exponents")
        object.__setattr__(self, "sigma", tuple(clean))

    @property
    def table(self) -> VarTable:
        return phase_space_table(self.n)

    def sigma_poly(self) -> SpectralPoly:
        return SpectralPoly(self.table, {g: CoeffPoly.const(self.table, c) for g, c in self.sigma})

    @property
    def has_negative_exponents(self) -> bool:
        return self.m < 0 or self.r < 0 or any(g < 0 for g, _ in self.sigma)

    def label(self) -> str:
        sig = "+".join(f"{c}*l^{g}" for g, c in self.sigma) or "0"
        return f"n={self.n} m={self.m} r={self.r} sigma={sig}"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "r": self.r,
            "sigma": [
                {"gamma": g, "num": str(c.numerator), "den": str(c.denominator)}
                for g, c in self.sigma
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BenentiSpec":
        sigma = tuple(
            (int(s["gamma"]), Fraction(int(s["num"]), int(s["den"])))
            for s in data.get("sigma", [])
        )
        return cls(int(data["n"]), int(data["m"]), int(data["r"]), sigma)


@lru_cache(maxsize=None)
def basic_potential(n: int, gamma: int) -> tuple[CoeffPoly, ...]:
    """Potential vector for a monomial of exponent gamma, built by iterating
    the raising recursion (gamma >= 0) or its inverse (gamma < 0) from the
    base vector (0, ..., 0, -1)."""
    table = phase_space_table(n)
    if gamma == 0:
        z = CoeffPoly.zero(table)
        return tuple([z] * (n - 1) + [CoeffPoly.const(table, -1)])
    if gamma > 0:
        prev = basic_potential(n, gamma - 1)
        out = []
        for i in range(n):
            qi = CoeffPoly.variable(table, f"q{i + 1}")
            nxt = prev[i + 1] if i + 1 < n else CoeffPoly.zero(table)
            out.append(-qi * prev[0] + nxt)
        return tuple(out)
    succ = basic_potential(n, gamma + 1)
    top = succ[n - 1] * CoeffPoly.variable(table, f"q{n}", -1)
    out = [-top]
    for j in range(1, n):
        out.append(succ[j - 1] - CoeffPoly.variable(table, f"q{j}") * top)
    return tuple(out)


def _qcoef(table: VarTable, j: int) -> CoeffPoly:
    # q_0 is the constant 1 by convention
    return CoeffPoly.const(table, 1) if j == 0 else CoeffPoly.variable(table, f"q{j}")


@lru_cache(maxsize=None)
def metric_tensor(n: int, m: int) -> tuple[tuple[CoeffPoly, ...], ...]:
    """Contravariant metric block: entry (i, k) is -sum_{l=0}^{k-1} of
    q_{k-l-1} times the i-th component of the exponent-(m+l) potential."""
    table = phase_space_table(n)
    rows = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = CoeffPoly.zero(table)
            for l in range(k + 1):
                acc = acc + _qcoef(table, k - l) * basic_potential(n, m + l)[i]
            row.append(-acc)
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=None)
def killing_tensor(n: int, j: int) -> tuple[tuple[CoeffPoly, ...], ...]:
    """j-th Killing tensor in matrix form, row index upper; j=1 is the
    identity.  Entry (i, k) is -sum_{l=0}^{j-1} q_{j-l-1} V_i^{(n+l-k-1)}
    with k running 0..n-1 (so the potential exponent is n+l-(k+1))."""
    if not 1 <= j <= n:
        raise ValueError(f"tensor index {j} out of range 1..{n}")
    table = phase_space_table(n)
    rows = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = CoeffPoly.zero(table)
            for l in range(j):
                acc = acc + _qcoef(table, j - l - 1) * basic_potential(n, n + l - (k + 1))[i]
            row.append(-acc)
        rows.append(tuple(row))
    return tuple(rows)


def _mat_mul(A, B, table):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = CoeffPoly.zero(table)
            for s in range(n):
                acc = acc + A[i][s] * B[s][k]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


@lru_cache(maxsize=256)
def hamiltonians(spec: BenentiSpec) -> tuple[CoeffPoly, ...]:
    """The n commuting Hamiltonians: quadratic kinetic form (1/2) p^T K_j G p
    plus the sigma-weighted potential components."""
    n, table = spec.n, spec.table
    G = metric_tensor(n, spec.m)
    p = [CoeffPoly.variable(table, f"p{i + 1}") for i in range(n)]
    half = Rat(1) / 2
    out = []
    for j in range(1, n + 1):
        KG = _mat_mul(killing_tensor(n, j), G, table)
        kin = CoeffPoly.zero(table)
        for i in range(n):
            for k in range(n):
                if not KG[i][k].is_zero:
                    kin = kin + KG[i][k] * (p[i] * p[k])
        H = kin * half
        for gamma, c in spec.sigma:
            H = H + basic_potential(n, gamma)[j - 1] * Rat(c.numerator, c.denominator)
        out.append(H)
    return tuple(out)


@dataclass(frozen=True)
class SeparationPoint:
    """A float point (lambda_1..lambda_n, mu_1..mu_n) with distinct lambdas."""

    lambdas: tuple[float, ...]
    mus: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "mus", tuple(float(x) for x in self.mus))
        if len(self.lambdas) != len(self.mus) or not self.lambdas:
            raise ValueError("need equally many lambdas and mus, at least one each")
        n = len(self.lambdas)
        for i in range(n):
            for j in range(i + 1, n):
                if self.lambdas[i] == self.lambdas[j]:
                    raise ValueError(f"duplicate lambda value {self.lambdas[i]}")

    @property
    def n(self) -> int:
        return len(self.lambdas)


def viete_map(pt: SeparationPoint) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Canonical change to (q, p): q_i is the i-th signed elementary symmetric
    polynomial of the lambdas, p_i = -sum_k lambda_k^{n-i} mu_k / Delta_k."""
    lam, mu = pt.lambdas, pt.mus
    n = pt.n
    coef = [1.0]
    for x in lam:
        coef = [1.0] + [coef[i] - x * coef[i - 1] for i in range(1, len(coef))] + [-x * coef[-1]]
    q = tuple(coef[1:])
    p = []
    deltas = []
    for k in range(n):
        d = 1.0
        for j in range(n):
            if j != k:
                d *= lam[k] - lam[j]
        deltas.append(d)
    for i in range(1, n + 1):
        p.append(-sum(lam[k] ** (n - i) * mu[k] / deltas[k] for k in range(n)))
    return q, tuple(p)


def _sigma_value(spec: BenentiSpec, x: float) -> float:
    return sum(float(c) * x ** g for g, c in spec.sigma)


def _curve_rhs(spec: BenentiSpec, lam: float, mu: float) -> float:
    # defining relation solved for the Hamiltonian side at one point
    return 0.5 * lam ** spec.m * mu * mu - _sigma_value(spec, lam)


def oracle_hamiltonians(spec: BenentiSpec, pt: SeparationPoint) -> tuple[float, ...]:
    """Float Hamiltonian values from the defining n x n Vandermonde system,
    solved with partial pivoting; warns above condition 1e12."""
    if pt.n != spec.n:
        raise ValueError(f"point has {pt.n} degrees of freedom, spec has {spec.n}")
    A = np.vander(np.array(pt.lambdas), spec.n)
    rhs = np.array([_curve_rhs(spec, lam, mu) for lam, mu in zip(pt.lambdas, pt.mus)])
    cond = np.linalg.cond(A)
    if cond > 1e12:
        warnings.warn(f"separation point system is ill-conditioned (cond={cond:.3e})",
                      RuntimeWarning, stacklevel=2)
    sol = np.linalg.solve(A, rhs)
    return tuple(float(x) for x in sol)


def _draw_value(rng: random.Random) -> float:
    # magnitude in [0.5, 2], random sign: stays away from every singular set
    x = rng.uniform(0.5, 2.0)
    return x if rng.random() < 0.5 else -x


def sample_separation_point(spec: BenentiSpec, rng: random.Random,
                            min_gap: float = 0.25) -> SeparationPoint:
    """Random point in the standard sampling box with pairwise separated
    lambdas, so the float map and the oracle both stay well conditioned."""
    n = spec.n
    for _ in range(1000):
        lams = [_draw_value(rng) for _ in range(n)]
        ok = all(abs(lams[i] - lams[j]) >= min_gap
                 for i in range(n) for j in range(i + 1, n))
        if ok:
            mus = [_draw_value(rng) for _ in range(n)]
            return SeparationPoint(tuple(lams), tuple(mus))
    raise RuntimeError("failed to draw separated lambdas")


def sample_phase_point(spec: BenentiSpec, rng: random.Random) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Random (q, p) reached through the separation-coordinate map; q_n is
    automatically nonzero because it is a product of nonzero lambdas."""
    return viete_map(sample_separation_point(spec, rng))
