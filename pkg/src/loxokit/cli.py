"""Command-line surface.

Subcommands:
  integrate  {circle, loxodrome, dk4}: integrate a curve, emit CSV + JSON
  lox-flat   sample a flat-model loxodrome between two points
  classify   orbit type of a conformal Killing field
  verify     run the seeded property suites
  bench      compare the compiled and pure-Python integrator backends

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 integration abort.  Identical configuration (and seed) reproduces
byte-identical CSV/JSON output; numeric CSV fields carry 17 significant
digits so doubles round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import _kernel
from . import flatmodel as fm
from .engine import SYSTEMS, IntegratorConfig, integrate
from .kinematics import DegenerateJerkError, KinematicState
from .mobius import structure_from_config
from .svg import write_polyline_svg
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3


class ConfigError(ValueError):
    pass


def _fmt(v: float) -> str:
    return "%.17g" % v


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _load_json_arg(text: str, what: str):
    """Accept inline JSON or a path to a JSON file."""
    if text is None:
        raise ConfigError(f"missing required field: {what}")
    stripped = text.strip()
    if stripped.startswith("{") or stripped.startswith("["):
        try:
            return json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON for {what}: {exc}")
    if os.path.exists(stripped):
        with open(stripped) as fh:
            try:
                return json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad JSON in {what} file {stripped!r}: {exc}")
    raise ConfigError(f"{what}: expected inline JSON or an existing file, got {text!r}")


def _parse_rho(text: str | None):
    if text is None:
        return "flat-model"
    stripped = text.strip()
    if stripped.startswith("{"):
        obj = _load_json_arg(stripped, "rho")
        if isinstance(obj, dict) and "rho" in obj:
            return obj["rho"]
        return obj
    return stripped


def _state_from_config(obj, system: str, gauge: str) -> KinematicState:
    if not isinstance(obj, dict):
        raise ConfigError("init must be a JSON object")
    for key in ("x", "U", "A"):
        if key not in obj:
            raise ConfigError(f"missing required field: init.{key}")
    J = obj.get("J")
    kappa = obj.get("kappa")
    if system in ("loxodrome", "dk4") and J is None:
        raise ConfigError(f"missing required field: init.J (needed by {system})")
    if system == "loxodrome" and kappa is None:
        raise ConfigError("missing required field: init.kappa (needed by loxodrome)")
    return KinematicState(
        x=np.asarray(obj["x"], dtype=float),
        U=np.asarray(obj["U"], dtype=float),
        A=np.asarray(obj["A"], dtype=float),
        J=None if J is None else np.asarray(J, dtype=float),
        kappa=None if kappa is None else float(kappa),
        gauge=gauge,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_integrate(args) -> int:
    structure = structure_from_config(_load_json_arg(args.metric, "metric"),
                                      _parse_rho(args.rho))
    init = _state_from_config(_load_json_arg(args.init, "init"), args.model,
                              structure.label)
    config = IntegratorConfig(
        scheme=args.scheme, step=args.step, tol=args.tol, max_length=args.length,
        drift_abort=args.drift_abort, jerk_threshold=args.jerk_threshold,
        renormalize=args.renormalize,
    )
    try:
        trace = integrate(args.model, init, structure, config)
    except DegenerateJerkError as exc:
        _emit({"termination": "degenerate-jerk", "error": str(exc),
               "config": config.as_dict(), "seed": args.seed})
        return EXIT_ABORT
    if args.out:
        trace.write_csv(args.out)
    if args.svg:
        write_polyline_svg(args.svg, trace.x[:, :2])
    summary = trace.summary()
    summary["seed"] = args.seed
    summary["out"] = args.out
    _emit(summary)
    return EXIT_OK if trace.reason == "completed" else EXIT_ABORT


def cmd_lox_flat(args) -> int:
    if args.beta == 0.0:
        raise ConfigError("beta must be non-zero (the circle limit is out of range)")
    try:
        p = complex(args.p)
        q = complex(args.q)
    except ValueError as exc:
        raise ConfigError(f"bad complex endpoint: {exc}")
    try:
        spec = fm.LoxodromeSpec(p, q, args.beta)
    except ValueError as exc:
        raise ConfigError(str(exc))

    if args.samples < 1:
        raise ConfigError("samples must be at least 1")
    if args.samples == 1:
        thetas = [args.theta_min]
    else:
        thetas = [args.theta_min + i * (args.theta_max - args.theta_min) / (args.samples - 1)
                  for i in range(args.samples)]
    rows = []
    skipped = 0
    for theta in thetas:
        try:
            z = fm.loxodrome_point(spec, theta)
        except fm.PoleError:
            skipped += 1
            print(f"skipping theta={theta:.6g}: pole", file=sys.stderr)
            continue
        rows.append((theta, z.real, z.imag))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("theta,re_z,im_z\n")
            for theta, re_z, im_z in rows:
                fh.write(f"{_fmt(theta)},{_fmt(re_z)},{_fmt(im_z)}\n")
    if args.svg:
        write_polyline_svg(args.svg, [(r[1], r[2]) for r in rows])
    _emit({
        "p": [p.real, p.imag], "q": [q.real, q.imag], "beta": args.beta,
        "samples": len(rows), "skipped": skipped,
        "out": args.out, "svg": args.svg, "seed": args.seed,
    })
    return EXIT_OK


def cmd_classify(args) -> int:
    k = fm.KillingCoefficients(u=args.u, v=args.v, lam=args.lam, F=args.F,
                               P=args.P, Q=args.Q)
    if k.is_zero():
        raise ConfigError("all Killing coefficients are zero")
    result = fm.classify(k)
    _emit({
        "kind": result.kind,
        "beta": result.beta,
        "handedness": result.handedness,
        "discriminant": [result.discriminant.real, result.discriminant.imag],
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in list(SUITES) + ["all"]:
        raise ConfigError(f"unknown suite {args.suite!r} "
                          f"(expected one of {', '.join(list(SUITES) + ['all'])})")
    report = run_suite(args.suite, seed=args.seed)
    report["backend"] = _kernel.DEFAULT_BACKEND
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def cmd_bench(args) -> int:
    """Integrate the standard spiral scenario on every available backend."""
    from .mobius import flat_structure
    from .verify import spiral_coords
    from .kinematics import SymbolicCurve

    flat = flat_structure(2)
    init = SymbolicCurve(spiral_coords(1.0), flat).state(0.0)
    config = IntegratorConfig(scheme="rk4-fixed", step=args.step,
                              max_length=args.length, record_every=1000)
    results = {}
    endpoints = {}
    for name in _kernel.available_backends():
        t0 = time.perf_counter()
        trace = integrate("loxodrome", init, flat, config, backend=name)
        dt = time.perf_counter() - t0
        steps = int(round(config.max_length / config.step))
        results[name] = {
            "seconds": dt,
            "steps_per_second": steps / dt,
            "termination": trace.reason,
        }
        endpoints[name] = trace.x[-1]
    report = {"scenario": {"system": "loxodrome", "length": args.length,
                           "step": args.step}, "backends": results}
    if len(endpoints) == 2:
        gap = float(np.max(np.abs(endpoints["compiled"] - endpoints["python"])))
        report["endpoint_gap"] = gap
        report["speedup"] = (results["python"]["seconds"]
                             / results["compiled"]["seconds"])
    _emit(report)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loxokit",
        description="Distinguished curves of two-dimensional Moebius geometry:"
                    " conformal circles, ordinal loxodromes, and their tractor"
                    " calculus.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="integrate an invariant curve equation")
    p.add_argument("model", choices=sorted(SYSTEMS))
    p.add_argument("--metric", help='metric spec, e.g. \'{"kind":"sphere","K":1.0}\'')
    p.add_argument("--rho", default=None,
                   help='"flat-model", "constant-curvature", "schouten" or '
                        '{"P11":"...",...}')
    p.add_argument("--init", help='initial data {"x":[..],"U":[..],"A":[..],...}')
    p.add_argument("--scheme", default="rk4-fixed",
                   choices=["rk4-fixed", "rk45-adaptive"])
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--drift-abort", type=float, default=1e-6)
    p.add_argument("--jerk-threshold", type=float, default=1e-10)
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--out", default=None, help="CSV trace path")
    p.add_argument("--svg", default=None, help="optional SVG polyline path")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("lox-flat", help="sample a flat-model loxodrome")
    p.add_argument("--p", required=True, help="complex start point, e.g. '-0.8+0.1j'")
    p.add_argument("--q", required=True, help="complex end point")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--theta-min", type=float, default=-40.0)
    p.add_argument("--theta-max", type=float, default=40.0)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lox_flat)

    p = sub.add_parser("classify", help="classify a conformal Killing field")
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--v", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--F", type=float, default=0.0)
    p.add_argument("--P", type=float, default=0.0)
    p.add_argument("--Q", type=float, default=0.0)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="compare integrator backends")
    p.add_argument("--length", type=float, default=50.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateJerkError as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
