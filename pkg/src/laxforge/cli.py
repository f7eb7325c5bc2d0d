"""Command-line front end.

Four subcommands share one spec vocabulary (``--n``, ``--f``, ``--g``,
``--sigma`` or ``--example <id>``):

- ``build``     construct and print H_1..H_n, L and U_1..U_n
- ``verify``    run check batteries, one report per output line
- ``simulate``  integrate a flow with RK4 and account for drift
- ``examples``  list the frozen worked examples

Exit codes partition outcomes: 0 success, 1 check failure, 2 usage error,
3 runtime singularity (division failure or trajectory blowup).

All output is deterministic for a fixed seed; the seed comes from ``--seed``
or, failing that, the ``LAXFORGE_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .algebra import DivisionError
from .benenti import BenentiSpec, hamiltonians
from .fixtures import fixture_ids, get_fixture
from .lax import flow_matrix, lax_matrix
from . import verify as _verify

SIM_TOL = 1e-8

_GRID_RANDOM = {"smoke": 0, "small": 5, "full": 20}


def _fmt_pow(sym: str, e: int) -> str:
    if e == 0:
        return "1"
    if e == 1:
        return sym
    return f"{sym}^{e}"


def parse_sigma(text: str):
    """Parse the "gamma:coeff,gamma:coeff" Laurent-monomial list."""
    terms = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        gamma, sep, coeff = chunk.partition(":")
        if not sep:
            raise ValueError(f"sigma term {chunk!r} is not gamma:coeff")
        terms.append((int(gamma), Fraction(coeff)))
    if not terms:
        raise ValueError("sigma must contain at least one term")
    return tuple(terms)


def parse_numbers(text: str):
    """Comma-separated exact rationals or decimals, returned as floats."""
    return tuple(float(Fraction(chunk.strip())) for chunk in text.split(",") if chunk.strip())


def default_initial(spec: BenentiSpec):
    """Slow rest point near the origin with q_n bounded away from zero.

    The alternating signs put the n = 2 case at (a, -a^2), which stays on
    its energy surface for the whole default integration window.
    """
    a = 0.019
    q0 = tuple((-1.0) ** (i - 1) * a ** i for i in range(1, spec.n + 1))
    return q0, (0.0,) * spec.n


def _resolve_seed(args, parser) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get("LAXFORGE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        parser.error(f"LAXFORGE_SEED is not an integer: {raw!r}")


def _resolve_spec(args, parser, required: bool = True):
    """Build a BenentiSpec from either --example or the four spec flags."""
    flag_spec = args.n is not None or args.f is not None or args.g is not None or args.sigma is not None
    if args.example and flag_spec:
        parser.error("give either --example or explicit spec flags, not both")
    if args.example:
        try:
            return get_fixture(args.example).spec
        except ValueError as exc:
            parser.error(str(exc))
    if not flag_spec:
        if required:
            parser.error("a spec is required: --example or --n/--f/--g/--sigma")
        return None
    if args.n is None or args.sigma is None:
        parser.error("--n and --sigma are required when building a spec from flags")
    try:
        sigma = parse_sigma(args.sigma)
        return BenentiSpec(args.n, args.f or 0, args.g or 0, sigma)
    except (ValueError, ZeroDivisionError) as exc:
        parser.error(f"invalid spec: {exc}")


def battery_for_spec(spec: BenentiSpec, seed: int):
    reports = [_verify.check_spectral_curve(spec)]
    reports += [_verify.check_lax_equation(spec, k) for k in range(1, spec.n + 1)]
    reports.append(_verify.check_involution(spec))
    reports.append(_verify.check_remainder_identity(spec))
    reports.append(_verify.check_bracket_symmetry(spec))
    if spec.n == 2:
        reports.append(_verify.check_n2_closed_form(spec))
    reports.append(_verify.check_gauge_invariance(spec, seed=seed))
    reports.append(_verify.check_oracle_agreement(spec, seed=seed))
    return reports


def _emit_reports(reports, fmt: str, out) -> None:
    for rep in reports:
        if fmt == "json":
            out.write(json.dumps(rep.to_json(), sort_keys=True) + "\n")
        else:
            line = f"{'PASS' if rep.ok else 'FAIL'} {rep.check} [{rep.spec.label()}]"
            if not rep.ok and rep.witness is not None:
                line += f" witness={rep.witness}"
            out.write(line + "\n")


def cmd_build(args, parser) -> int:
    spec = _resolve_spec(args, parser)
    try:
        hams = hamiltonians(spec)
        lax = lax_matrix(spec)
        flows = [flow_matrix(spec, k) for k in range(1, spec.n + 1)]
    except DivisionError as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return 3
    out = sys.stdout
    if args.format == "json":
        doc = {
            "spec": spec.to_json(),
            "hamiltonians": [h.to_json() for h in hams],
            "lax": lax.to_json(),
            "flows": [u.to_json() for u in flows],
        }
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return 0
    out.write(f"spec: {spec.label()}\n")
    for k, h in enumerate(hams, start=1):
        out.write(f"H_{k} = {h}\n")
    out.write("L:\n" + lax.format() + "\n")
    for k, u in enumerate(flows, start=1):
        out.write(f"U_{k}:\n" + u.format() + "\n")
    return 0


def cmd_verify(args, parser) -> int:
    seed = _resolve_seed(args, parser)
    spec = _resolve_spec(args, parser, required=False)
    if args.corrupt:
        reports = _verify.negative_controls(spec or get_fixture("ex1").spec)
    elif args.grid:
        specs = _verify.grid_specs(args.grid)
        specs = specs + _verify.random_specs(_GRID_RANDOM[args.grid], seed=seed)
        reports = _verify.run_grid(specs)
    elif args.example:
        reports = [_verify.check_fixture(args.example, seed=seed)]
        reports += battery_for_spec(spec, seed)
    elif spec is not None:
        reports = battery_for_spec(spec, seed)
    else:
        reports = []
        for ex in fixture_ids():
            reports.append(_verify.check_fixture(ex, seed=seed))
            reports += battery_for_spec(get_fixture(ex).spec, seed)
    _emit_reports(reports, args.format, sys.stdout)
    return 0 if all(r.ok for r in reports) else 1


def cmd_simulate(args, parser) -> int:
    seed = _resolve_seed(args, parser)
    spec = _resolve_spec(args, parser)
    try:
        q0 = parse_numbers(args.q0) if args.q0 else None
        p0 = parse_numbers(args.p0) if args.p0 else None
        probes = parse_numbers(args.probes) if args.probes else (2.5, -5.0)
    except (ValueError, ZeroDivisionError) as exc:
        parser.error(f"invalid number list: {exc}")
    if (q0 is None) != (p0 is None):
        parser.error("--q0 and --p0 must be given together")
    if q0 is None:
        q0, p0 = default_initial(spec)
    try:
        report = _verify.simulate(spec, q0, p0, args.dt, args.t_end,
                                  probes=probes, flow=args.flow)
    except _verify.SingularityError as exc:
        print(f"simulate failed: {exc}", file=sys.stderr)
        return 3
    except DivisionError as exc:
        print(f"simulate failed: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        parser.error(str(exc))
    worst = max(max(report.energy_drift, default=0.0), report.eigen_drift)
    status = "pass" if worst <= SIM_TOL else "fail"
    out = sys.stdout
    if args.format == "json":
        doc = {"spec": spec.to_json(), "status": status, "trajectory": report.to_json(),
               "seed": seed}
        out.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        out.write(f"spec: {spec.label()}\n")
        out.write(f"flow: t_{args.flow}  dt: {args.dt}  t_end: {report.t_end}\n")
        drifts = ", ".join(f"{d:.3e}" for d in report.energy_drift)
        out.write(f"energy drift per H_k: [{drifts}]\n")
        out.write(f"eigenvalue drift: {report.eigen_drift:.3e}\n")
        out.write(f"trace drift: {report.trace_drift:.3e}\n")
        out.write(f"probes: {list(report.samples)}\n")
        out.write(f"status: {status}\n")
    return 0 if status == "pass" else 1


def cmd_examples(args, parser) -> int:
    out = sys.stdout
    for ex in fixture_ids():
        spec = get_fixture(ex).spec
        if args.format == "json":
            out.write(json.dumps({"id": ex, "spec": spec.to_json()}, sort_keys=True) + "\n")
        else:
            sig = "+".join(f"{c}*{_fmt_pow('l', g)}" for g, c in spec.sigma)
            out.write(f"{ex:<8} n={spec.n}  f={_fmt_pow('l', spec.m)}"
                      f"  g={_fmt_pow('l', spec.r)}  sigma={sig}\n")
    return 0


def _add_spec_flags(sub):
    sub.add_argument("--n", type=int, help="number of degrees of freedom")
    sub.add_argument("--f", type=int, help="exponent m of the momentum weight l^m")
    sub.add_argument("--g", type=int, help="exponent r of the matrix weight l^r")
    sub.add_argument("--sigma", help='Laurent terms "gamma:coeff,..." e.g. "-2:1" or "4:-1"')
    sub.add_argument("--example", help="use a frozen example spec (see the examples subcommand)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laxforge",
        description="Construct, verify and integrate 2x2 Lax representations "
                    "of Benenti-class separable systems.")
    subs = parser.add_subparsers(dest="command", required=True)

    b = subs.add_parser("build", help="print H_1..H_n, L and U_1..U_n")
    _add_spec_flags(b)

    v = subs.add_parser("verify", help="run check batteries")
    _add_spec_flags(v)
    v.add_argument("--grid", choices=sorted(_GRID_RANDOM),
                   help="run the spectral/Lax/involution battery over a spec grid")
    v.add_argument("--corrupt", action="store_true",
                   help="run the built-in negative controls (must exit 1)")

    s = subs.add_parser("simulate", help="integrate one flow with RK4")
    _add_spec_flags(s)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t-end", type=float, default=10.0)
    s.add_argument("--flow", type=int, default=1, help="which Hamiltonian drives the flow")
    s.add_argument("--probes", help='spectral sample points "2.5,-5.0"')
    s.add_argument("--q0", help="initial positions; use --q0=... if the list starts with a minus")
    s.add_argument("--p0", help="initial momenta")

    e = subs.add_parser("examples", help="list the frozen worked examples")

    for sub in (b, v, s, e):
        sub.add_argument("--format", choices=("text", "json"), default="text")
        sub.add_argument("--seed", type=int, default=None)
    return parser


_VALUE_FLAGS = ("--sigma", "--q0", "--p0", "--probes")


def _glue_values(argv):
    """Fuse value flags with their argument so tokens like "-2:1" survive
    argparse's option detection."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_glue_values(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    handler = {"build": cmd_build, "verify": cmd_verify,
               "simulate": cmd_simulate, "examples": cmd_examples}[args.command]
    try:
        return handler(args, parser)
    except SystemExit as exc:
        # parser.error inside a handler
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
