"""Exact sparse algebra for phase-space expressions with a spectral parameter.

Coefficients are exact rationals.  Polynomials live over a fixed table of named
variables; a subset of the variables is "localized", meaning negative powers of
them are allowed (the ring is localized at those variables, so monomials in
them are units).  A second layer handles polynomials in a distinguished
spectral parameter whose coefficients are such phase-space polynomials; the
spectral parameter itself may carry negative exponents on the dividend side of
the division routine below.

Everything here is deterministic: term order is graded lexicographic over the
exponent vectors, and serialization sorts by that order so equal values always
produce identical output.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as Rat

__all__ = [
    "Rat",
    "DivisionError",
    "VarTable",
    "phase_space_table",
    "CoeffPoly",
    "SpectralPoly",
    "invert_unit",
    "divmod_spectral",
    "poisson",
    "poisson_partials",
    "poisson_against",
    "poisson_spectral",
    "term_key",
]

Scalar = Union[int, Fraction, Rat]

_exps_add = operator.add


class DivisionError(ArithmeticError):
    """Raised when a division step is impossible in the localized ring."""


def _as_rat(x) -> Rat:
    if isinstance(x, Rat):
        return x
    if isinstance(x, int):
        return Rat(x)
    if isinstance(x, Fraction):
        return Rat(x.numerator, x.denominator)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def _is_scalar(x) -> bool:
    return isinstance(x, (int, Fraction)) or isinstance(x, Rat)


def term_key(exps: tuple[int, ...]) -> tuple:
    """Graded-lex sort key: total degree first, then the exponent vector."""
    return (sum(exps), exps)


@dataclass(frozen=True)
class VarTable:
    """Ordered variable names, which of them admit negative powers, and the
    conjugate (position, momentum) index pairs used by the Poisson bracket."""

    names: tuple[str, ...]
    localized: frozenset[int] = frozenset()
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "localized", frozenset(self.localized))
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))
        if not self.names:
            raise ValueError("variable table needs at least one name")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        n = len(self.names)
        if any(not (0 <= i < n) for i in self.localized):
            raise ValueError("localized index out of range")
        seen = set()
        for a, b in self.pairs:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise ValueError("bad conjugate pair")
            if a in seen or b in seen:
                raise ValueError("variable appears in two conjugate pairs")
            seen.update((a, b))

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown variable {name!r}") from None

    def is_localized(self, i: int) -> bool:
        return i in self.localized

    def gens(self) -> tuple["CoeffPoly", ...]:
        """One degree-1 polynomial per variable, in table order."""
        return tuple(CoeffPoly.variable(self, nm) for nm in self.names)


@lru_cache(maxsize=None)
def phase_space_table(n: int) -> VarTable:
    """Canonical table q1..qn, p1..pn, mu with q_n localized and (q_i, p_i)
    conjugate.  mu is spectator momentum data used by spectral determinants."""
    if n < 1:
        raise ValueError("need at least one degree of freedom")
    names = tuple(f"q{i}" for i in range(1, n + 1)) + tuple(f"p{i}" for i in range(1, n + 1)) + ("mu",)
    return VarTable(names, localized=frozenset({n - 1}), pairs=tuple((i, n + i) for i in range(n)))


class CoeffPoly:
    """Sparse exact polynomial over a variable table.

    ``terms`` maps exponent tuples to nonzero rationals.  Negative exponents
    are legal only at localized indices.  Instances are never mutated after
    construction; arithmetic returns fresh objects and shares nothing mutable.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars: VarTable, terms: Mapping[tuple, Scalar] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[tuple[int, ...], Rat] = {}
        for exps, coeff in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != vars.size:
                raise ValueError(f"exponent tuple of length {len(exps)}, table has {vars.size} variables")
            for i, e in enumerate(exps):
                if e < 0 and i not in vars.localized:
                    raise ValueError(f"negative power of non-localized variable {vars.names[i]}")
            c = _as_rat(coeff)
            if exps in clean:
                raise ValueError(f"duplicate exponent tuple {exps}")
            if c:
                clean[exps] = c
        self.vars = vars
        self.terms = clean

    @classmethod
    def _raw(cls, vars: VarTable, terms: dict) -> "CoeffPoly":
        # internal fast path: terms must already be validated and zero-free
        obj = object.__new__(cls)
        obj.vars = vars
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, vars: VarTable) -> "CoeffPoly":
        return cls._raw(vars, {})

    @classmethod
    def const(cls, vars: VarTable, c: Scalar) -> "CoeffPoly":
        c = _as_rat(c)
        if not c:
            return cls._raw(vars, {})
        return cls._raw(vars, {(0,) * vars.size: c})

    @classmethod
    def variable(cls, vars: VarTable, name: str, power: int = 1) -> "CoeffPoly":
        i = vars.index(name)
        if power < 0 and i not in vars.localized:
            raise ValueError(f"negative power of non-localized variable {name}")
        if power == 0:
            return cls.const(vars, 1)
        exps = [0] * vars.size
        exps[i] = power
        return cls._raw(vars, {tuple(exps): Rat(1)})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def _check(self, other: "CoeffPoly"):
        if self.vars is not other.vars and self.vars != other.vars:
            raise ValueError("variable tables differ")

    def __eq__(self, other):
        if isinstance(other, CoeffPoly):
            return (self.vars is other.vars or self.vars == other.vars) and self.terms == other.terms
        if _is_scalar(other):
            c = _as_rat(other)
            if not c:
                return not self.terms
            return self.terms == {(0,) * self.vars.size: c}
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, CoeffPoly):
            self._check(other)
            out = dict(self.terms)
            for e, c in other.terms.items():
                v = out.get(e)
                if v is None:
                    out[e] = c
                else:
                    v = v + c
                    if v:
                        out[e] = v
                    else:
                        del out[e]
            return CoeffPoly._raw(self.vars, out)
        if _is_scalar(other):
            c = _as_rat(other)
            if not c:
                return self
            zero = (0,) * self.vars.size
            out = dict(self.terms)
            v = out.get(zero)
            if v is None:
                out[zero] = c
            else:
                v = v + c
                if v:
                    out[zero] = v
                else:
                    del out[zero]
            return CoeffPoly._raw(self.vars, out)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return CoeffPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, CoeffPoly) or _is_scalar(other):
            return self.__add__(-other if not _is_scalar(other) else -_as_rat(other))
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            return (-self).__add__(_as_rat(other))
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, CoeffPoly):
            self._check(other)
            a, b = self.terms, other.terms
            if not a or not b:
                return CoeffPoly._raw(self.vars, {})
            if len(a) > len(b):
                a, b = b, a
            if len(a) == 1:
                ((e1, c1),) = a.items()
                return CoeffPoly._raw(
                    self.vars,
                    {tuple(map(_exps_add, e1, e2)): c1 * c2 for e2, c2 in b.items()},
                )
            out: dict = {}
            get = out.get
            for e1, c1 in a.items():
                for e2, c2 in b.items():
                    ne = tuple(map(_exps_add, e1, e2))
                    v = get(ne)
                    out[ne] = c1 * c2 if v is None else v + c1 * c2
            return CoeffPoly._raw(self.vars, {e: c for e, c in out.items() if c})
        if _is_scalar(other):
            c = _as_rat(other)
            if not c:
                return CoeffPoly._raw(self.vars, {})
            return CoeffPoly._raw(self.vars, {e: c0 * c for e, c0 in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            c = _as_rat(other)
            if not c:
                raise ZeroDivisionError("division by zero scalar")
            return self * (Rat(1) / c)
        if isinstance(other, CoeffPoly):
            return self * invert_unit(other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return invert_unit(self) ** (-n)
        result = CoeffPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def diff(self, var: str | int) -> "CoeffPoly":
        """Partial derivative; negative powers differentiate the usual way."""
        i = self.vars.index(var) if isinstance(var, str) else var
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return CoeffPoly._raw(self.vars, out)

    def eval(self, point: Mapping[str, float]) -> float:
        """Evaluate at float values, recursive Horner over the variable order.

        Missing variables are only an error if a term actually uses them.
        A zero value raises only when it would be raised to a negative power.
        """
        if not self.terms:
            return 0.0
        vals = [point.get(nm) for nm in self.vars.names]
        return _horner(list(self.terms.items()), 0, vals, self.vars.names)

    def to_json(self) -> list:
        return [
            {"exps": list(e), "num": str(c.numerator), "den": str(c.denominator)}
            for e, c in sorted(self.terms.items(), key=lambda t: term_key(t[0]))
        ]

    @classmethod
    def from_json(cls, vars: VarTable, data: list) -> "CoeffPoly":
        terms = []
        for entry in data:
            exps = tuple(int(e) for e in entry["exps"])
            terms.append((exps, Rat(int(entry["num"]), int(entry["den"]))))
        if len({e for e, _ in terms}) != len(terms):
            raise ValueError("duplicate exponent tuple in serialized polynomial")
        return cls(vars, terms)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        names = self.vars.names
        for e, c in sorted(self.terms.items(), key=lambda t: term_key(t[0]), reverse=True):
            varbit = "*".join(
                nm if k == 1 else f"{nm}^{k}" for nm, k in zip(names, e) if k != 0
            )
            if not varbit:
                pieces.append(str(c))
            elif c == 1:
                pieces.append(varbit)
            elif c == -1:
                pieces.append("-" + varbit)
            else:
                pieces.append(f"{c}*{varbit}")
        return " + ".join(pieces).replace("+ -", "- ")

    def __repr__(self):
        return f"<CoeffPoly {self}>"


def _horner(items, vi, vals, names):
    # items: [(exps, coeff)] all sharing the exponents consumed so far
    if vi == len(names):
        return float(items[0][1])
    groups: dict[int, list] = {}
    for e, c in items:
        groups.setdefault(e[vi], []).append((e, c))
    ks = sorted(groups)
    if ks == [0]:
        return _horner(groups[0], vi + 1, vals, names)
    x = vals[vi]
    if x is None:
        raise KeyError(f"missing value for variable {names[vi]}")
    x = float(x)
    if x == 0.0:
        if ks[0] < 0:
            raise ZeroDivisionError(f"zero value for {names[vi]} raised to a negative power")
        sub = groups.get(0)
        return _horner(sub, vi + 1, vals, names) if sub else 0.0
    acc = 0.0
    prev = None
    for k in reversed(ks):
        sub = _horner(groups[k], vi + 1, vals, names)
        acc = sub if prev is None else acc * x ** (prev - k) + sub
        prev = k
    return acc * x ** ks[0] if ks[0] else acc


def invert_unit(a: CoeffPoly) -> CoeffPoly:
    """Invert a unit of the localized ring: a single term whose variables are
    all localized.  Anything else raises DivisionError naming the value."""
    if len(a.terms) != 1:
        raise DivisionError(f"not a unit: {a}")
    ((exps, c),) = a.terms.items()
    for i, e in enumerate(exps):
        if e != 0 and i not in a.vars.localized:
            raise DivisionError(f"not a unit: {a}")
    return CoeffPoly._raw(a.vars, {tuple(-e for e in exps): Rat(1) / c})


class SpectralPoly:
    """Polynomial in the spectral parameter with CoeffPoly coefficients.

    Exponents of the spectral parameter may be negative (Laurent form).
    ``coeffs`` maps integer exponents to nonzero CoeffPoly values.
    """

    __slots__ = ("vars", "coeffs")

    def __init__(self, vars: VarTable, coeffs: Mapping[int, "CoeffPoly | Scalar"] = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        clean: dict[int, CoeffPoly] = {}
        for e, c in items:
            e = int(e)
            if not isinstance(c, CoeffPoly):
                c = CoeffPoly.const(vars, c)
            elif c.vars is not vars and c.vars != vars:
                raise ValueError("variable tables differ")
            if e in clean:
                raise ValueError(f"duplicate spectral exponent {e}")
            if not c.is_zero:
                clean[e] = c
        self.vars = vars
        self.coeffs = clean

    @classmethod
    def _raw(cls, vars: VarTable, coeffs: dict) -> "SpectralPoly":
        obj = object.__new__(cls)
        obj.vars = vars
        obj.coeffs = coeffs
        return obj

    @classmethod
    def zero(cls, vars: VarTable) -> "SpectralPoly":
        return cls._raw(vars, {})

    @classmethod
    def lam(cls, vars: VarTable, e: int = 1, c: Scalar = 1) -> "SpectralPoly":
        """c times the spectral parameter to the e-th power."""
        cc = CoeffPoly.const(vars, c)
        if cc.is_zero:
            return cls._raw(vars, {})
        return cls._raw(vars, {int(e): cc})

    @classmethod
    def of(cls, coeff: CoeffPoly, e: int = 0) -> "SpectralPoly":
        if coeff.is_zero:
            return cls._raw(coeff.vars, {})
        return cls._raw(coeff.vars, {int(e): coeff})

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def lambda_support(self) -> list[int]:
        return sorted(self.coeffs)

    def degree(self) -> int:
        if not self.coeffs:
            raise ValueError("zero polynomial has no degree")
        return max(self.coeffs)

    def min_exp(self) -> int:
        if not self.coeffs:
            raise ValueError("zero polynomial has no minimal exponent")
        return min(self.coeffs)

    def coeff(self, e: int) -> CoeffPoly:
        return self.coeffs.get(e) or CoeffPoly.zero(self.vars)

    def _check(self, other: "SpectralPoly"):
        if self.vars is not other.vars and self.vars != other.vars:
            raise ValueError("variable tables differ")

    def __eq__(self, other):
        if isinstance(other, SpectralPoly):
            return (self.vars is other.vars or self.vars == other.vars) and self.coeffs == other.coeffs
        if isinstance(other, CoeffPoly):
            return self == SpectralPoly.of(other)
        if _is_scalar(other):
            c = _as_rat(other)
            if not c:
                return not self.coeffs
            return self.coeffs == {0: CoeffPoly.const(self.vars, c)}
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, CoeffPoly) or _is_scalar(other):
            other = SpectralPoly.of(
                other if isinstance(other, CoeffPoly) else CoeffPoly.const(self.vars, other)
            )
        if isinstance(other, SpectralPoly):
            self._check(other)
            out = dict(self.coeffs)
            for e, c in other.coeffs.items():
                v = out.get(e)
                if v is None:
                    out[e] = c
                else:
                    v = v + c
                    if v.is_zero:
                        del out[e]
                    else:
                        out[e] = v
            return SpectralPoly._raw(self.vars, out)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return SpectralPoly._raw(self.vars, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (SpectralPoly, CoeffPoly)) or _is_scalar(other):
            return self.__add__(-other if not _is_scalar(other) else -_as_rat(other))
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, CoeffPoly) or _is_scalar(other):
            return (-self).__add__(other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, SpectralPoly):
            self._check(other)
            out: dict[int, CoeffPoly] = {}
            for e1, c1 in self.coeffs.items():
                for e2, c2 in other.coeffs.items():
                    ne = e1 + e2
                    v = out.get(ne)
                    out[ne] = c1 * c2 if v is None else v + c1 * c2
            return SpectralPoly._raw(self.vars, {e: c for e, c in out.items() if not c.is_zero})
        if isinstance(other, CoeffPoly) or _is_scalar(other):
            c = other if isinstance(other, CoeffPoly) else CoeffPoly.const(self.vars, other)
            if c.is_zero:
                return SpectralPoly._raw(self.vars, {})
            out = {}
            for e, c0 in self.coeffs.items():
                v = c0 * c
                if not v.is_zero:
                    out[e] = v
            return SpectralPoly._raw(self.vars, out)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = SpectralPoly._raw(self.vars, {0: CoeffPoly.const(self.vars, 1)})
        for _ in range(n):
            result = result * self
        return result

    def shift(self, s: int) -> "SpectralPoly":
        """Multiply by the spectral parameter to the s-th power."""
        return SpectralPoly._raw(self.vars, {e + s: c for e, c in self.coeffs.items()})

    def plus_part(self) -> "SpectralPoly":
        """Drop all negative spectral exponents."""
        return SpectralPoly._raw(self.vars, {e: c for e, c in self.coeffs.items() if e >= 0})

    def eval(self, point: Mapping[str, float], lam: float) -> float:
        if not self.coeffs:
            return 0.0
        lam = float(lam)
        ks = sorted(self.coeffs)
        if lam == 0.0 and ks[0] < 0:
            raise ZeroDivisionError("zero spectral parameter raised to a negative power")
        if lam == 0.0:
            c = self.coeffs.get(0)
            return c.eval(point) if c is not None else 0.0
        acc = 0.0
        prev = None
        for k in reversed(ks):
            sub = self.coeffs[k].eval(point)
            acc = sub if prev is None else acc * lam ** (prev - k) + sub
            prev = k
        return acc * lam ** ks[0] if ks[0] else acc

    def to_json(self) -> list:
        return [
            {"lexp": e, "coeff": self.coeffs[e].to_json()}
            for e in sorted(self.coeffs)
        ]

    @classmethod
    def from_json(cls, vars: VarTable, data: list) -> "SpectralPoly":
        coeffs = []
        for entry in data:
            coeffs.append((int(entry["lexp"]), CoeffPoly.from_json(vars, entry["coeff"])))
        if len({e for e, _ in coeffs}) != len(coeffs):
            raise ValueError("duplicate spectral exponent in serialized polynomial")
        return cls(vars, coeffs)

    def format(self, sym: str = "l") -> str:
        if not self.coeffs:
            return "0"
        pieces = []
        for e in sorted(self.coeffs, reverse=True):
            c = self.coeffs[e]
            lam = "" if e == 0 else (sym if e == 1 else f"{sym}^{e}")
            if not lam:
                pieces.append(str(c))
            elif len(c.terms) == 1:
                cs = str(c)
                if c == 1:
                    pieces.append(lam)
                elif c == -1:
                    pieces.append("-" + lam)
                else:
                    pieces.append(f"{cs}*{lam}")
            else:
                pieces.append(f"({c})*{lam}")
        return " + ".join(pieces).replace("+ -", "- ")

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"<SpectralPoly {self}>"


def divmod_spectral(b: SpectralPoly, a: SpectralPoly) -> tuple[SpectralPoly, SpectralPoly]:
    """Two-sided division b = rem + a * plus.

    The divisor must be monic in the spectral parameter with no negative
    spectral exponents.  The dividend may have negative spectral exponents;
    clearing them requires the divisor's constant spectral coefficient to be a
    unit of the localized ring (it is, for the monic position polynomial whose
    constant coefficient is the localized variable).  The remainder's spectral
    support lies in [0, deg a - 1], which makes the decomposition unique.
    """
    b._check(a)
    if a.is_zero:
        raise DivisionError("cannot divide by zero")
    if a.min_exp() < 0:
        raise DivisionError("divisor has negative spectral exponents")
    n = a.degree()
    if a.coeff(n) != 1:
        raise DivisionError(f"divisor is not monic: leading coefficient {a.coeff(n)}")
    acoeffs = a.coeffs
    work = dict(b.coeffs)
    plus: dict[int, CoeffPoly] = {}

    if work and min(work) < 0:
        a0inv = invert_unit(a.coeff(0))
        while work:
            e = min(work)
            if e >= 0:
                break
            c = work.pop(e)
            qt = c * a0inv
            plus[e] = qt
            for ae, ap in acoeffs.items():
                if ae == 0:
                    continue
                te = e + ae
                cur = work.get(te)
                nv = -(qt * ap) if cur is None else cur - qt * ap
                if nv.is_zero:
                    work.pop(te, None)
                else:
                    work[te] = nv

    while work:
        d = max(work)
        if d < n:
            break
        c = work.pop(d)
        s = d - n
        plus[s] = c
        for ae, ap in acoeffs.items():
            if ae == n:
                continue
            te = s + ae
            cur = work.get(te)
            nv = -(c * ap) if cur is None else cur - c * ap
            if nv.is_zero:
                work.pop(te, None)
            else:
                work[te] = nv

    return SpectralPoly._raw(b.vars, plus), SpectralPoly._raw(b.vars, work)


def poisson(a: CoeffPoly, b: CoeffPoly) -> CoeffPoly:
    """Canonical Poisson bracket over the table's conjugate pairs."""
    a._check(b)
    return poisson_against(a, poisson_partials(b))


def poisson_partials(h: CoeffPoly):
    """Precompute the partials of h used by the bracket, for reuse when h is
    bracketed against many polynomials."""
    pairs = h.vars.pairs
    if not pairs:
        raise ValueError("variable table has no conjugate pairs")
    dq = tuple(h.diff(qi) for qi, _ in pairs)
    dp = tuple(h.diff(pi) for _, pi in pairs)
    return (h.vars, dq, dp)

def poisson_against(a: CoeffPoly, partials) -> CoeffPoly:
    """Bracket of a against a polynomial given by its precomputed partials."""
    hvars, dq, dp = partials
    if a.vars is not hvars and a.vars != hvars:
        raise ValueError("variable tables differ")
    pairs = a.vars.pairs
    out = CoeffPoly.zero(a.vars)
    for (qi, pi), hq, hp in zip(pairs, dq, dp):
        da_q = a.diff(qi)
        da_p = a.diff(pi)
        if not da_q.is_zero and not hp.is_zero:
            out = out + da_q * hp
        if not da_p.is_zero and not hq.is_zero:
            out = out - da_p * hq
    return out


def poisson_spectral(s: SpectralPoly, h: CoeffPoly) -> SpectralPoly:
    """Coefficient-wise Poisson bracket of a spectral polynomial against h."""
    parts = poisson_partials(h)
    out = {}
    for e, c in s.coeffs.items():
        v = poisson_against(c, parts)
        if not v.is_zero:
            out[e] = v
    return SpectralPoly._raw(s.vars, out)
