"""Machine checks for the engine's structural identities.

Symbolic checks (involution, Lax residuals, curve reconstruction, division
identities) must produce exact zero polynomials; any nonzero residual is
serialized into the report as a witness.  Numeric checks (fixture and
oracle comparisons) carry their max relative deviation as witness and
compare it against a pinned tolerance.  A small RK4 integrator demonstrates
that the bundled flows conserve every Hamiltonian and the matrix spectrum.
"""

from __future__ import annotations

import cmath
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from multiprocessing import Pool

from .algebra import (CoeffPoly, SpectralPoly, divmod_spectral, invert_unit,
                      poisson, poisson_against, poisson_partials)
from .benenti import (BenentiSpec, hamiltonians, oracle_hamiltonians,
                      sample_separation_point, viete_map, _draw_value)
from .fixtures import SymbolicFixture, get_fixture
from .lax import (LaxMatrix, curve_division, flow_matrix, gauge_transform,
                  lax_matrix, spectral_determinant, u_leading, u_poly)

NUMERIC_TOL = 1e-9


@dataclass(frozen=True)
class CheckReport:
    check: str
    spec: BenentiSpec
    status: str
    witness: object = None

    def __post_init__(self):
        if self.status not in ("pass", "fail"):
            raise ValueError(f"bad status: {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        doc = {"check": self.check, "spec": self.spec.to_json(),
               "status": self.status}
        if self.witness is not None:
            doc["witness"] = self.witness
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "CheckReport":
        return cls(doc["check"], BenentiSpec.from_json(doc["spec"]),
                   doc["status"], doc.get("witness"))


class SingularityError(RuntimeError):
    """A trajectory or an evaluation hit the singular set q_n = 0."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class TrajectoryReport:
    t_end: float
    dt: float
    energy_drift: tuple[float, ...]
    eigen_drift: float
    samples: tuple[float, ...]
    trace_drift: float = 0.0
    times: tuple[float, ...] = ()
    energy_series: tuple[tuple[float, ...], ...] = ()
    eigen_series: tuple[float, ...] = ()

    def to_json(self) -> dict:
        return {
            "t_end": self.t_end,
            "dt": self.dt,
            "energy_drift": list(self.energy_drift),
            "eigen_drift": self.eigen_drift,
            "samples": list(self.samples),
            "trace_drift": self.trace_drift,
            "times": list(self.times),
            "energy_series": [list(s) for s in self.energy_series],
            "eigen_series": list(self.eigen_series),
        }


# ---------------------------------------------------------------------------
# shared per-spec computations

@dataclass(frozen=True)
class SystemParts:
    spec: BenentiSpec
    hams: tuple[CoeffPoly, ...]
    partials: tuple
    lax: LaxMatrix
    flows: tuple[LaxMatrix, ...]


@lru_cache(maxsize=64)
def system_parts(spec: BenentiSpec) -> SystemParts:
    hams = hamiltonians(spec)
    return SystemParts(
        spec,
        hams,
        tuple(poisson_partials(h) for h in hams),
        lax_matrix(spec),
        tuple(flow_matrix(spec, k) for k in range(1, spec.n + 1)),
    )


def _spectral_bracket(s: SpectralPoly, partials) -> SpectralPoly:
    return SpectralPoly(s.vars,
                        {e: poisson_against(c, partials)
                         for e, c in s.coeffs.items()})


def _lax_residual(L: LaxMatrix, U: LaxMatrix, partials) -> LaxMatrix:
    bracket = LaxMatrix(*(_spectral_bracket(e, partials)
                          for e in L.entries()))
    if (U.e11 + U.e22).is_zero:
        # traceless shortcut: [U,L] = [[bw-uc, 2(au-bv)], [2(cv-aw), uc-bw]]
        com11 = U.e12 * L.e21 - L.e12 * U.e21
        com12 = (U.e11 * L.e12 - U.e12 * L.e11) * 2
        com21 = (U.e21 * L.e11 - U.e11 * L.e21) * 2
        com = LaxMatrix(com11, com12, com21, -com11)
    else:
        com = U.commutator(L)
    return bracket - com


def _sym_report(name: str, spec: BenentiSpec, residuals: dict) -> CheckReport:
    bad = {k: str(v) for k, v in residuals.items() if not v.is_zero}
    if bad:
        return CheckReport(name, spec, "fail", bad)
    return CheckReport(name, spec, "pass")


def _num_report(name: str, spec: BenentiSpec, deviation: float,
                tol: float = NUMERIC_TOL) -> CheckReport:
    status = "pass" if deviation <= tol else "fail"
    return CheckReport(name, spec, status, deviation)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# symbolic checks

def _involution_residuals(hams) -> dict:
    out = {}
    parts = [poisson_partials(h) for h in hams]
    for i in range(len(hams)):
        for j in range(i + 1, len(hams)):
            out[f"{{H{i + 1},H{j + 1}}}"] = poisson_against(hams[i], parts[j])
    return out


def check_involution(spec: BenentiSpec) -> CheckReport:
    parts = system_parts(spec)
    out = {}
    for i in range(spec.n):
        for j in range(i + 1, spec.n):
            out[f"{{H{i + 1},H{j + 1}}}"] = poisson_against(
                parts.hams[i], parts.partials[j])
    return _sym_report("check_involution", spec, out)


def check_lax_equation(spec: BenentiSpec, k: int) -> CheckReport:
    if not 1 <= k <= spec.n:
        raise ValueError(f"flow index out of range: {k}")
    parts = system_parts(spec)
    res = _lax_residual(parts.lax, parts.flows[k - 1], parts.partials[k - 1])
    slots = ("(1,1)", "(1,2)", "(2,1)", "(2,2)")
    return _sym_report(f"check_lax_equation:k={k}", spec,
                       dict(zip(slots, res.entries())))


def check_spectral_curve(spec: BenentiSpec) -> CheckReport:
    parts = system_parts(spec)
    t = spec.table
    det = spectral_determinant(parts.lax, spec.r)
    inner = SpectralPoly(t, {spec.n - k: h
                             for k, h in enumerate(parts.hams, 1)})
    mu = CoeffPoly.variable(t, "mu")
    inner = -inner + SpectralPoly.of(mu * mu * Fraction(1, 2), spec.m)
    inner = inner - spec.sigma_poly()
    residual = det - inner.shift(2 * spec.r - spec.m) * 2
    return _sym_report("check_spectral_curve", spec, {"det": residual})


def check_remainder_identity(spec: BenentiSpec) -> CheckReport:
    """Dividing the curve polynomial by u must leave exactly the
    Hamiltonian combination as remainder, and the quotient must rebuild
    the lower-left matrix entry."""
    parts = system_parts(spec)
    quot, rem = curve_division(spec)
    hsum = SpectralPoly(spec.table, {spec.n - k: h
                                     for k, h in enumerate(parts.hams, 1)})
    w_from_quot = (quot * -2).shift(2 * spec.r - spec.m)
    return _sym_report("check_remainder_identity", spec, {
        "remainder": rem - hsum,
        "quotient": w_from_quot - parts.lax.e21,
    })


def check_bracket_symmetry(spec: BenentiSpec) -> CheckReport:
    """Coefficient brackets of the two polynomial entries: the momentum
    row commutes with itself, the cross brackets are index-symmetric, and
    each cross bracket has a closed division form."""
    n = spec.n
    t = spec.table
    u = u_poly(n)
    v = system_parts(spec).lax.e11
    ucoef = [u.coeff(n - a) for a in range(1, n + 1)]
    vcoef = [v.coeff(n - b) for b in range(1, n + 1)]
    out = {}
    for a in range(n):
        for b in range(a + 1, n):
            out[f"{{v{a + 1},v{b + 1}}}"] = poisson(vcoef[a], vcoef[b])
            out[f"sym:{a + 1},{b + 1}"] = (poisson(ucoef[a], vcoef[b])
                                           - poisson(ucoef[b], vcoef[a]))
    lam_r = SpectralPoly.lam(t, spec.r)
    for k in range(1, n + 1):
        _, rem = divmod_spectral(lam_r * u_leading(n, k), u)
        got = SpectralPoly(t, {n - a: poisson(ucoef[a - 1], vcoef[k - 1])
                               for a in range(1, n + 1)})
        out[f"closed:k={k}"] = got + rem
    return _sym_report("check_bracket_symmetry", spec, out)


def check_n2_closed_form(spec: BenentiSpec) -> CheckReport:
    if spec.n != 2:
        raise ValueError("closed-form comparison is defined for n = 2 only")
    parts = system_parts(spec)
    L = parts.lax
    shift = spec.m - spec.r
    out = {}
    for k in (1, 2):
        tk = u_leading(2, k)
        a = (tk * L.e11).shift(shift) + _spectral_bracket(
            L.e12, parts.partials[k - 1])
        b = (tk * L.e12).shift(shift)
        c = (tk * L.e21).shift(shift) - _spectral_bracket(
            L.e11, parts.partials[k - 1]) * 2
        twice_u = L.e12 * 2
        U = parts.flows[k - 1]
        out[f"a{k}"] = twice_u * U.e11 - a
        out[f"b{k}"] = twice_u * U.e12 - b
        out[f"c{k}"] = twice_u * U.e21 - c
        out[f"d{k}"] = twice_u * U.e22 + a
    return _sym_report("check_n2_closed_form", spec, out)


def random_gauge(spec: BenentiSpec, rng: random.Random) -> LaxMatrix:
    """Random unit-determinant matrix, free of the spectral variable.

    Built as shear * shear * scaling, so the determinant is exactly 1 by
    construction: [[1,b],[0,1]] [[1,0],[c,1]] [[d,0],[0,1/d]] with b, c
    small random polynomials and d an invertible monomial."""
    t = spec.table
    names = t.names

    def small_poly() -> CoeffPoly:
        terms = {}
        for _ in range(rng.randint(1, 2)):
            exps = [0] * len(names)
            for _ in range(rng.randint(0, 2)):
                exps[rng.randrange(len(names) - 1)] += 1
            terms[tuple(exps)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        return CoeffPoly(t, {k: v for k, v in terms.items() if v})

    b = small_poly()
    c = small_poly()
    d = CoeffPoly.variable(t, f"q{spec.n}", rng.choice((-1, 0, 1)))
    d = d * Fraction(rng.choice((1, 2, 3)), rng.choice((1, 2)))
    d_inv = invert_unit(d)
    return LaxMatrix(SpectralPoly.of(d + b * c * d),
                     SpectralPoly.of(b * d_inv),
                     SpectralPoly.of(c * d),
                     SpectralPoly.of(d_inv))


def check_gauge_invariance(spec: BenentiSpec, seed: int = 0,
                           count: int = 20) -> CheckReport:
    rng = random.Random(seed)
    parts = system_parts(spec)
    base = spectral_determinant(parts.lax, spec.r)
    out = {}
    for i in range(count):
        omega = random_gauge(spec, rng)
        lt, _ = gauge_transform(parts.lax, parts.flows[0], omega)
        out[f"omega{i}"] = spectral_determinant(lt, spec.r) - base
    return _sym_report("check_gauge_invariance", spec, out)


# ---------------------------------------------------------------------------
# numeric checks

def check_oracle_agreement(spec: BenentiSpec, seed: int = 0,
                           points: int = 100) -> CheckReport:
    rng = random.Random(seed)
    hams = hamiltonians(spec)
    worst = 0.0
    for _ in range(points):
        pt = sample_separation_point(spec, rng)
        oracle = oracle_hamiltonians(spec, pt)
        q, p = viete_map(pt)
        vals = {f"q{i + 1}": q[i] for i in range(spec.n)}
        vals.update({f"p{i + 1}": p[i] for i in range(spec.n)})
        for h, ref in zip(hams, oracle):
            worst = max(worst, _rel(h.eval(vals), ref))
    return _num_report("check_oracle_agreement", spec, worst)


def _point_dict(n: int, q, p) -> dict:
    vals = {f"q{i + 1}": q[i] for i in range(n)}
    vals.update({f"p{i + 1}": p[i] for i in range(n)})
    return vals


def check_fixture(example_id: str, seed: int = 0,
                  points: int = 10) -> CheckReport:
    fx = get_fixture(example_id)
    spec = fx.spec
    n = spec.n
    parts = system_parts(spec)
    name = f"check_fixture:{example_id}"
    slots = ("(1,1)", "(1,2)", "(2,1)", "(2,2)")
    symbolic = isinstance(fx, SymbolicFixture)

    if symbolic:
        # recorded directly in (q, p): demand term-for-term equality first
        residuals = {}
        for k, (h, ref) in enumerate(zip(parts.hams, fx.hamiltonians), 1):
            residuals[f"H{k}"] = h - ref
        for slot, got, ref in zip(slots, parts.lax.entries(),
                                  fx.lax.entries()):
            residuals[f"L{slot}"] = got - ref
        for k, (got, ref) in enumerate(zip(parts.flows, fx.flows), 1):
            for slot, a, b in zip(slots, got.entries(), ref.entries()):
                residuals[f"U{k}{slot}"] = a - b
        report = _sym_report(name, spec, residuals)
        if not report.ok:
            return report

    rng = random.Random(seed)
    worst = 0.0
    for _ in range(points):
        x = tuple(_draw_value(rng) for _ in range(n))
        y = tuple(_draw_value(rng) for _ in range(n))
        lam = _draw_value(rng)
        q, p = (x, y) if symbolic else fx.to_viete(x, y)
        vals = _point_dict(n, q, p)

        def ref_entry(matrix, i, j):
            cell = matrix[2 * i + j] if symbolic else matrix[i][j]
            if symbolic:
                return cell.eval(vals, lam)
            return cell(x, y, lam)

        for k in range(n):
            ref = (fx.hamiltonians[k].eval(vals) if symbolic
                   else fx.hamiltonians[k](x, y))
            worst = max(worst, _rel(parts.hams[k].eval(vals), ref))
        got = parts.lax.eval(vals, lam)
        ref_lax = fx.lax.entries() if symbolic else fx.lax
        for i in range(2):
            for j in range(2):
                worst = max(worst, _rel(got[i][j], ref_entry(ref_lax, i, j)))
        for U, refm in zip(parts.flows, fx.flows):
            gotu = U.eval(vals, lam)
            ref_u = refm.entries() if symbolic else refm
            for i in range(2):
                for j in range(2):
                    worst = max(worst,
                                _rel(gotu[i][j], ref_entry(ref_u, i, j)))
    return _num_report(name, spec, worst)


# ---------------------------------------------------------------------------
# negative controls

def _flip_one_term(h: CoeffPoly) -> CoeffPoly:
    key = max(h.terms)
    bump = CoeffPoly(h.vars, {key: h.terms[key] * 2})
    return h - bump


def negative_controls(spec: BenentiSpec) -> list[CheckReport]:
    """Deliberately corrupted inputs; both reports must come back failing
    with nonzero witnesses, otherwise the zero checks prove nothing."""
    parts = system_parts(spec)
    hams = list(parts.hams)
    idx = 1 if spec.n > 1 else 0
    hams[idx] = _flip_one_term(hams[idx])
    inv = _sym_report("negative_control:involution", spec,
                      _involution_residuals(tuple(hams)))

    t = spec.table
    one = SpectralPoly.of(CoeffPoly.const(t, 1))
    bad_u = parts.flows[0] + LaxMatrix(SpectralPoly.zero(t), one,
                                       SpectralPoly.zero(t),
                                       SpectralPoly.zero(t))
    res = _lax_residual(parts.lax, bad_u, parts.partials[0])
    lax = _sym_report("negative_control:lax", spec,
                      dict(zip(("(1,1)", "(1,2)", "(2,1)", "(2,2)"),
                               res.entries())))
    return [inv, lax]


# ---------------------------------------------------------------------------
# spec grids

def grid_specs(preset: str = "full") -> tuple[BenentiSpec, ...]:
    if preset == "full":
        ns, ms, rs = range(1, 5), range(-2, 3), range(-1, 3)
    elif preset == "small":
        ns, ms, rs = range(1, 3), range(-1, 2), range(0, 2)
    elif preset == "smoke":
        ns, ms, rs = range(1, 3), (0,), (0,)
    else:
        raise ValueError(f"unknown grid preset: {preset!r}")
    out = []
    for n in ns:
        lo, hi = (-3, n + 3) if preset == "full" else (-1, n + 1)
        for m in ms:
            for r in rs:
                for gamma in range(lo, hi + 1):
                    out.append(BenentiSpec(n, m, r, ((gamma, Fraction(1)),)))
    return tuple(out)


def random_specs(count: int = 20, seed: int = 0) -> tuple[BenentiSpec, ...]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, 4)
        terms = {}
        for _ in range(rng.randint(2, 4)):
            gamma = rng.randint(-3, n + 3)
            terms[gamma] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        sigma = tuple((g, c) for g, c in terms.items() if c)
        if not sigma:
            continue
        out.append(BenentiSpec(n, rng.randint(-2, 2), rng.randint(-1, 2),
                               sigma))
    return tuple(out)


def _grid_job(spec: BenentiSpec) -> list[CheckReport]:
    reports = [check_spectral_curve(spec)]
    for k in range(1, spec.n + 1):
        reports.append(check_lax_equation(spec, k))
    reports.append(check_involution(spec))
    return reports


def run_grid(specs, processes: int | None = None) -> list[CheckReport]:
    """Curve, Lax and involution checks over a batch of specs.

    Jobs are independent, so they fan out over a process pool; the report
    order follows the input spec order regardless of scheduling."""
    specs = list(specs)
    if processes is None:
        processes = min(os.cpu_count() or 1, len(specs)) or 1
    if processes <= 1 or len(specs) <= 1:
        batches = [_grid_job(s) for s in specs]
    else:
        # heaviest jobs first so the tail of the run stays busy
        order = sorted(range(len(specs)),
                       key=lambda i: (specs[i].n, abs(specs[i].m - 2 * specs[i].r)),
                       reverse=True)
        with Pool(processes, maxtasksperchild=32) as pool:
            done = dict(zip(order, pool.map(_grid_job,
                                            [specs[i] for i in order],
                                            chunksize=1)))
        batches = [done[i] for i in range(len(specs))]
    return [rep for batch in batches for rep in batch]


# ---------------------------------------------------------------------------
# RK4 flow

def simulate(spec: BenentiSpec, q0, p0, dt: float, t_end: float,
             probes=(2.5, -5.0), flow: int = 1,
             series_points: int = 200) -> TrajectoryReport:
    n = spec.n
    if dt <= 0:
        raise ValueError("dt must be positive")
    if len(q0) != n or len(p0) != n:
        raise ValueError(f"initial data must have length {n}")
    probes = tuple(float(x) for x in probes)
    if any(x == 0 for x in probes):
        raise ValueError("probe values must be nonzero")
    if not 1 <= flow <= n:
        raise ValueError(f"flow index out of range: {flow}")

    parts = system_parts(spec)
    h = parts.hams[flow - 1]
    t = spec.table
    dq = [h.diff(f"p{i + 1}") for i in range(n)]
    dp = [-h.diff(f"q{i + 1}") for i in range(n)]
    u, v, w = parts.lax.e12, parts.lax.e11, parts.lax.e21

    state = [float(x) for x in q0] + [float(x) for x in p0]
    vals = _point_dict(n, state[:n], state[n:])

    def refresh(st):
        for i in range(n):
            vals[f"q{i + 1}"] = st[i]
            vals[f"p{i + 1}"] = st[n + i]

    def deriv(st, now):
        refresh(st)
        try:
            return ([f.eval(vals) for f in dq] + [f.eval(vals) for f in dp])
        except (ZeroDivisionError, OverflowError) as exc:
            raise SingularityError(f"singular point at t = {now:.6g}: {exc}",
                                   now) from exc

    def observe(now):
        refresh(state)
        try:
            energies = [hk.eval(vals) for hk in parts.hams]
            eigs, traces = [], []
            for lam in probes:
                uv = u.eval(vals, lam)
                if abs(uv) < 1e-9:
                    raise SingularityError(
                        f"probe {lam} hit a root of the polynomial entry "
                        f"at t = {now:.6g}", now)
                disc = v.eval(vals, lam) ** 2 + uv * w.eval(vals, lam)
                eigs.append(cmath.sqrt(disc))
                m = parts.lax.eval(vals, lam)
                traces.append(m[0][0] ** 2 + 2 * m[0][1] * m[1][0]
                              + m[1][1] ** 2)
        except (ZeroDivisionError, OverflowError) as exc:
            raise SingularityError(f"singular point at t = {now:.6g}: {exc}",
                                   now) from exc
        if not all(math.isfinite(e) for e in energies):
            raise SingularityError(f"state blew up at t = {now:.6g}", now)
        return energies, eigs, traces

    e0, g0, r0 = observe(0.0)
    steps = int(round(t_end / dt)) if t_end > 0 else 0
    stride = max(1, steps // series_points) if steps else 1

    energy_drift = [0.0] * n
    eigen_drift = 0.0
    trace_drift = 0.0
    times, e_series, g_series = [0.0], [[0.0] for _ in range(n)], [0.0]

    for step in range(1, steps + 1):
        now = step * dt
        k1 = deriv(state, now - dt)
        s2 = [a + 0.5 * dt * b for a, b in zip(state, k1)]
        k2 = deriv(s2, now - 0.5 * dt)
        s3 = [a + 0.5 * dt * b for a, b in zip(state, k2)]
        k3 = deriv(s3, now - 0.5 * dt)
        s4 = [a + dt * b for a, b in zip(state, k3)]
        k4 = deriv(s4, now)
        state = [a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(state, k1, k2, k3, k4)]
        energies, eigs, traces = observe(now)
        step_eig = 0.0
        for i in range(n):
            energy_drift[i] = max(energy_drift[i], abs(energies[i] - e0[i]))
        for a, b in zip(eigs, g0):
            step_eig = max(step_eig, abs(a - b))
        eigen_drift = max(eigen_drift, step_eig)
        for a, b in zip(traces, r0):
            trace_drift = max(trace_drift, abs(a - b))
        if step % stride == 0 or step == steps:
            times.append(now)
            for i in range(n):
                e_series[i].append(abs(energies[i] - e0[i]))
            g_series.append(step_eig)

    return TrajectoryReport(
        t_end=steps * dt, dt=dt,
        energy_drift=tuple(energy_drift),
        eigen_drift=eigen_drift,
        samples=probes,
        trace_drift=trace_drift,
        times=tuple(times),
        energy_series=tuple(tuple(s) for s in e_series),
        eigen_series=tuple(g_series),
    )
