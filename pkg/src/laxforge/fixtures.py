"""Frozen reference systems for regression checks.

Seven bundled systems, identified by short ids.  The ``ex3_*`` family is
recorded exactly, with rational coefficients in the engine's own (q, p)
variables, so the engine output must match term for term.  The others are
recorded in auxiliary Cartesian-style variables (x, y) together with the
coordinate change into (q, p); their matrix entries are plain float
formulas meant for pointwise comparison through that map.

Entries are hard-coded on purpose.  Nothing here calls the construction
code, otherwise the comparison tests would check nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .algebra import CoeffPoly, SpectralPoly
from .benenti import BenentiSpec
from .lax import LaxMatrix

Point = Sequence[float]
Entry = Callable[[Point, Point, float], float]
EntryMatrix = tuple[tuple[Entry, Entry], tuple[Entry, Entry]]

_half = Fraction(1, 2)


@dataclass(frozen=True)
class SymbolicFixture:
    example_id: str
    spec: BenentiSpec
    hamiltonians: tuple[CoeffPoly, ...]
    lax: LaxMatrix
    flows: tuple[LaxMatrix, ...]


@dataclass(frozen=True)
class CartesianFixture:
    example_id: str
    spec: BenentiSpec
    # (x, y) -> (q, p), both n-tuples of floats
    to_viete: Callable[[Point, Point], tuple[tuple[float, ...], tuple[float, ...]]]
    hamiltonians: tuple[Callable[[Point, Point], float], ...]
    lax: EntryMatrix
    flows: tuple[EntryMatrix, ...]


def _ex1() -> CartesianFixture:
    spec = BenentiSpec(3, 0, 0, ((5, Fraction(1)),))

    def to_viete(x, y):
        x1, x2, x3 = x
        y1, y2, y3 = y
        q = (x1, x2 + x1 * x1 / 4, x3 + x1 * x2 / 2)
        p = (y1 - x1 * y2 / 2 + (x1 * x1 / 4 - x2 / 2) * y3,
             y2 - x1 * y3 / 2,
             y3)
        return q, p

    def h1(x, y):
        x1, x2, x3 = x
        y1, y2, y3 = y
        return 0.5 * y2 ** 2 + y1 * y3 + 0.5 * x1 ** 3 - 1.5 * x1 * x2 + x3

    def h2(x, y):
        x1, x2, x3 = x
        y1, y2, y3 = y
        return (y1 * y2 + 0.5 * x1 * y2 ** 2 - 0.5 * x3 * y3 ** 2
                + 0.5 * x1 * y1 * y3 - 0.5 * x2 * y2 * y3
                + 0.1875 * x1 ** 4 - x1 * x3 - x2 ** 2)

    def h3(x, y):
        x1, x2, x3 = x
        y1, y2, y3 = y
        return (0.5 * y1 ** 2 + x1 ** 2 * y2 ** 2 / 8 + x2 ** 2 * y3 ** 2 / 8
                + 0.5 * x1 * y1 * y2 + 0.5 * x2 * y1 * y3
                - (0.25 * x1 * x2 + x3) * y2 * y3
                + 0.75 * x1 ** 2 * x3 + 0.375 * x1 ** 3 * x2
                - x2 * x3 - 0.5 * x1 * x2 ** 2)

    def l11(x, y, lam):
        x1, x2, _ = x
        y1, y2, y3 = y
        return (-y3 * lam ** 2 - (y2 + 0.5 * x1 * y3) * lam
                - y1 - 0.5 * x1 * y2 - 0.5 * x2 * y3)

    def l12(x, y, lam):
        x1, x2, x3 = x
        return (lam ** 3 + x1 * lam ** 2 + (0.25 * x1 ** 2 + x2) * lam
                + x3 + 0.5 * x1 * x2)

    def l21(x, y, lam):
        x1, x2, _ = x
        _, y2, y3 = y
        return (2 * lam ** 2 - (y3 ** 2 + 2 * x1) * lam
                - 2 * y2 * y3 + 1.5 * x1 ** 2 - 2 * x2)

    def neg(f):
        return lambda x, y, lam: -f(x, y, lam)

    lax = ((l11, l12), (l21, neg(l11)))

    def const(c):
        return lambda x, y, lam: c

    u1 = ((const(0.0), const(0.5)), (const(0.0), const(0.0)))

    def u2_11(x, y, lam):
        return -0.5 * y[2]

    def u2_12(x, y, lam):
        return 0.5 * lam + 0.5 * x[0]

    u2 = ((u2_11, u2_12), (const(1.0), neg(u2_11)))

    def u3_11(x, y, lam):
        x1 = x[0]
        _, y2, y3 = y
        return -0.5 * y3 * lam - 0.5 * y2 - 0.25 * x1 * y3

    def u3_12(x, y, lam):
        x1, x2, _ = x
        return 0.5 * lam ** 2 + 0.5 * x1 * lam + 0.125 * x1 ** 2 + 0.5 * x2

    def u3_21(x, y, lam):
        return lam - 0.5 * y[2] ** 2 - x[0]

    u3 = ((u3_11, u3_12), (u3_21, neg(u3_11)))

    return CartesianFixture("ex1", spec, to_viete, (h1, h2, h3), lax, (u1, u2, u3))


def _ex2_map(x, y):
    x1, x2 = x
    y1, y2 = y
    return (-x1, -0.25 * x2 * x2), (-y1, -2.0 * y2 / x2)


def _ex2_h1(x, y):
    x1, x2 = x
    y1, y2 = y
    return 0.5 * y1 ** 2 + 0.5 * y2 ** 2 + x1 ** 3 + 0.5 * x1 * x2 ** 2


def _ex2_h2(x, y):
    x1, x2 = x
    y1, y2 = y
    return (0.5 * x2 * y1 * y2 - 0.5 * x1 * y2 ** 2
            + 0.25 * x1 ** 2 * x2 ** 2 + 0.0625 * x2 ** 4)


def _ex2_l12(x, y, lam):
    x1, x2 = x
    return lam ** 2 - x1 * lam - 0.25 * x2 ** 2


def _neg(f):
    return lambda x, y, lam: -f(x, y, lam)


def _ex2(example_id: str, r: int, lax: EntryMatrix,
         flows: tuple[EntryMatrix, ...]) -> CartesianFixture:
    spec = BenentiSpec(2, 1, r, ((4, Fraction(-1)),))
    return CartesianFixture(example_id, spec, _ex2_map,
                            (_ex2_h1, _ex2_h2), lax, flows)


def _ex2_g0() -> CartesianFixture:
    def l11(x, y, lam):
        x1, x2 = x
        y1, y2 = y
        return 2 * y2 / x2 * lam + y1 - 2 * x1 * y2 / x2

    def l21(x, y, lam):
        x1, x2 = x
        y1, y2 = y
        return (-2 * lam - (4 * y2 ** 2 / x2 ** 2 + 2 * x1)
                + (4 * x1 * y2 ** 2 / x2 ** 2 - 4 * y1 * y2 / x2
                   - 2 * x1 ** 2 - 0.5 * x2 ** 2) / lam)

    def u1_11(x, y, lam):
        return y[1] / x[1]

    def u1_12(x, y, lam):
        return 0.5 * lam

    u1 = ((u1_11, u1_12), (lambda x, y, lam: -1.0, _neg(u1_11)))

    def u2_11(x, y, lam):
        x1, x2 = x
        y1, y2 = y
        return y2 / x2 * lam - x1 * y2 / x2 + 0.5 * y1

    def u2_12(x, y, lam):
        return 0.5 * lam ** 2 - 0.5 * x[0] * lam

    def u2_21(x, y, lam):
        return -lam - 2 * y[1] ** 2 / x[1] ** 2 - x[0]

    u2 = ((u2_11, u2_12), (u2_21, _neg(u2_11)))

    lax = ((l11, _ex2_l12), (l21, _neg(l11)))
    return _ex2("ex2_g0", 0, lax, (u1, u2))


def _ex2_g1() -> CartesianFixture:
    def l11(x, y, lam):
        return y[0] * lam + 0.5 * x[1] * y[1]

    def l21(x, y, lam):
        x1, x2 = x
        return (-2 * lam ** 3 - 2 * x1 * lam ** 2
                - (2 * x1 ** 2 + 0.5 * x2 ** 2) * lam + y[1] ** 2)

    def u1_21(x, y, lam):
        return -lam - 2 * x[0]

    zero = lambda x, y, lam: 0.0
    u1 = ((zero, lambda x, y, lam: 0.5), (u1_21, zero))

    def u2_11(x, y, lam):
        return 0.5 * y[0]

    def u2_12(x, y, lam):
        return 0.5 * lam - 0.5 * x[0]

    def u2_21(x, y, lam):
        x1, x2 = x
        return -lam ** 2 - x1 * lam - x1 ** 2 - 0.5 * x2 ** 2

    u2 = ((u2_11, u2_12), (u2_21, _neg(u2_11)))

    lax = ((l11, _ex2_l12), (l21, _neg(l11)))
    return _ex2("ex2_g1", 1, lax, (u1, u2))


def _ex2_g2() -> CartesianFixture:
    def l11(x, y, lam):
        x1, x2 = x
        y1, y2 = y
        return (x1 * y1 + 0.5 * x2 * y2) * lam + 0.25 * x2 ** 2 * y1

    def l21(x, y, lam):
        x1, x2 = x
        y1, y2 = y
        return (-2 * lam ** 5 - 2 * x1 * lam ** 4
                - (2 * x1 ** 2 + 0.5 * x2 ** 2) * lam ** 3
                + (y1 ** 2 + y2 ** 2) * lam ** 2
                + y1 * (x1 * y1 + x2 * y2) * lam
                + 0.25 * x2 ** 2 * y1 ** 2)

    def u1_11(x, y, lam):
        return -0.5 * y[0] / lam

    def u1_12(x, y, lam):
        return 0.5 / lam

    def u1_21(x, y, lam):
        x1, x2 = x
        return (-lam ** 2 - 2 * x1 * lam - (3 * x1 ** 2 + 0.5 * x2 ** 2)
                - 0.5 * y[0] ** 2 / lam)

    u1 = ((u1_11, u1_12), (u1_21, _neg(u1_11)))

    def u2_11(x, y, lam):
        return 0.5 * x[0] * y[0] / lam

    def u2_12(x, y, lam):
        return 0.5 - 0.5 * x[0] / lam

    def u2_21(x, y, lam):
        x1, x2 = x
        y1, y2 = y
        return (-lam ** 3 - x1 * lam ** 2 - (x1 ** 2 + 0.5 * x2 ** 2) * lam
                + 0.5 * (y1 ** 2 + y2 ** 2 - x1 * x2 ** 2)
                + 0.5 * x1 * y1 ** 2 / lam)

    u2 = ((u2_11, u2_12), (u2_21, _neg(u2_11)))

    lax = ((l11, _ex2_l12), (l21, _neg(l11)))
    return _ex2("ex2_g2", 2, lax, (u1, u2))


def _ex3_traceless(e11: SpectralPoly, e12: SpectralPoly,
                   e21: SpectralPoly) -> LaxMatrix:
    return LaxMatrix(e11, e12, e21, -e11)


def _ex3(example_id: str, r: int) -> SymbolicFixture:
    spec = BenentiSpec(2, -1, r, ((-2, Fraction(1)),))
    t = spec.table
    q1, q2, p1, p2, _ = t.gens()
    S = lambda coeffs: SpectralPoly(t, coeffs)
    one = CoeffPoly.const(t, 1)
    # the momentum combination every entry below is built from
    pq = p1 + q1 * p2

    hams = (
        -p1 * p1 / q2 * _half - q1 * p1 * p2 / q2
        + (p2 * p2 - q1 * q1 * p2 * p2 / q2) * _half - q1 / q2 ** 2,
        -q1 * p1 * p1 / q2 * _half + p1 * p2 - q1 * q1 * p1 * p2 / q2
        + q1 * p2 * p2 - q1 ** 3 * p2 * p2 / q2 * _half
        + q2 ** -1 - q1 * q1 / q2 ** 2,
    )
    u12 = S({2: one, 1: q1, 0: q2})

    if r == 0:
        lax = _ex3_traceless(
            S({1: -p2, 0: -pq}),
            u12,
            S({0: -pq ** 2 / q2 - 2 * q1 / q2 ** 2, -1: q2 ** -1 * 2}),
        )
        flows = (
            _ex3_traceless(
                S({-1: -pq / q2 * _half}),
                S({-1: CoeffPoly.const(t, _half)}),
                S({-1: -(pq ** 2 / q2 ** 2) * _half - 2 * q1 / q2 ** 3,
                   -2: q2 ** -2}),
            ),
            _ex3_traceless(
                S({-1: -q1 * pq / q2 * _half}),
                S({0: CoeffPoly.const(t, _half), -1: q1 * _half}),
                S({-1: -q1 * pq ** 2 / q2 ** 2 * _half + q2 ** -2
                       - 2 * q1 ** 2 / q2 ** 3,
                   -2: q1 / q2 ** 2}),
            ),
        )
    elif r == -1:
        lax = _ex3_traceless(
            S({1: pq / q2, 0: q1 * pq / q2 - p2}),
            u12,
            S({0: -pq ** 2 / q2 ** 2,
               -1: -q1 * pq ** 2 / q2 ** 2 + 2 * (p1 * p2 + q1 * p2 * p2) / q2,
               -2: -2 * q1 / q2 ** 2,
               -3: q2 ** -1 * 2}),
        )
        flows = (
            _ex3_traceless(
                SpectralPoly.zero(t),
                S({0: CoeffPoly.const(t, _half)}),
                S({-1: (p1 * p2 + q1 * p2 * p2) / q2 ** 2
                       - (q1 * pq ** 2 + 2) / q2 ** 3 * _half
                       + 2 * q1 ** 2 / q2 ** 4,
                   -2: -2 * q1 / q2 ** 3,
                   -3: q2 ** -2}),
            ),
            _ex3_traceless(
                S({0: pq / q2 * _half}),
                S({1: CoeffPoly.const(t, _half), 0: q1 * _half}),
                S({-1: q1 * p2 * pq / q2 ** 2
                       - (q1 ** 2 * pq ** 2 + 6 * q1) / q2 ** 3 * _half
                       + 2 * q1 ** 3 / q2 ** 4,
                   -2: q2 ** -2 - 2 * q1 ** 2 / q2 ** 3,
                   -3: q1 / q2 ** 2}),
            ),
        )
    else:
        lax = _ex3_traceless(
            S({1: -p1, 0: q2 * p2}),
            u12,
            S({2: -(pq ** 2 / q2 - p2 * p2 + 2 * q1 / q2 ** 2),
               1: 2 * p1 * p2 + q1 * p2 * p2 + q2 ** -1 * 2,
               0: -q2 * p2 * p2}),
        )
        flows = (
            _ex3_traceless(
                S({-2: p2 * _half, -1: -pq / q2 * _half}),
                S({-2: CoeffPoly.const(t, _half)}),
                S({-1: (p1 * p2 + q1 * p2 * p2) / q2 + q2 ** -2,
                   -2: -p2 * p2 * _half}),
            ),
            _ex3_traceless(
                S({-2: q1 * p2 * _half,
                   -1: -(q1 * p1 - q2 * p2 + q1 * q1 * p2) / q2 * _half}),
                S({-1: CoeffPoly.const(t, _half), -2: q1 * _half}),
                S({-1: p2 * (2 * q1 * p1 + 2 * q1 * q1 * p2 - q2 * p2)
                       / q2 * _half + q1 / q2 ** 2,
                   -2: -q1 * p2 * p2 * _half}),
            ),
        )
    return SymbolicFixture(example_id, spec, hams, lax, flows)


def _build_all() -> dict:
    out = {}
    for fx in (_ex1(), _ex2_g0(), _ex2_g1(), _ex2_g2(),
               _ex3("ex3_g0", 0), _ex3("ex3_gm1", -1), _ex3("ex3_g1", 1)):
        out[fx.example_id] = fx
    return out


FIXTURES: dict[str, CartesianFixture | SymbolicFixture] = _build_all()


def fixture_ids() -> tuple[str, ...]:
    return tuple(FIXTURES)


def get_fixture(example_id: str):
    try:
        return FIXTURES[example_id]
    except KeyError:
        raise ValueError(f"unknown example id: {example_id!r}") from None
