"""Command-line interface.

Exit codes: 0 pass, 1 failed check, 2 configuration or input error,
3 inconclusive.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .capacity import capacity_lp, capacity_orbit_upper
from .entropy import bk_profile, perron_root, topological_entropy, word_growth_entropy
from .harness import (
    ConfigError,
    _jsonable,
    default_scenario_paths,
    emit_report,
    load_scenario,
    report_json,
    report_text,
    run_verification,
    write_profile_csv,
)
from .kernels import BACKEND
from .measures import MeasureError, parse_measure
from .sensitivity import (
    first_sensitive_time_measure,
    first_sensitive_time_top,
    rate_a1,
    rate_a2_profile,
    rate_mu_bowen,
    rate_mu_direct,
)
from .simplex import LPError
from .symbolic import SftError, parse_point, parse_sft, parse_union

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _dump(obj) -> None:
    sys.stdout.write(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def _emit_estimate(est, csv_path: str | None) -> None:
    _dump(est.as_dict())
    if csv_path and est.profile is not None:
        write_profile_csv(est.profile, Path(csv_path))


def cmd_verify(args) -> int:
    if args.default:
        paths = default_scenario_paths()
    elif args.scenario:
        paths = [Path(p) for p in args.scenario]
    else:
        raise ConfigError("give scenario files or --default")
    scenarios = [load_scenario(p, seed=args.seed) for p in paths]  # validate all first
    reports = [run_verification(sc) for sc in scenarios]
    payload = reports if len(reports) > 1 else reports[0]
    if args.out:
        for fmt in args.format:
            emit_report(payload, fmt, args.out)
    if "json" in args.format and not args.out:
        sys.stdout.write(report_json(payload))
    else:
        sys.stdout.write(report_text(reports))
    worst = max((r.exit_code for r in reports), key=lambda c: {0: 0, 3: 1, 1: 2}[c])
    return worst


def cmd_entropy(args) -> int:
    sft = parse_sft(args.sft)
    _dump({
        "sft": str(sft),
        "h_top": topological_entropy(sft),
        "perron_root": perron_root(sft),
        "word_growth": word_growth_entropy(sft, args.L),
        "word_growth_L": args.L,
        "irreducible": sft.irreducible,
        "primitive": sft.primitive,
    })
    return 0


def cmd_capacity(args) -> int:
    sft = parse_sft(args.sft)
    V = parse_union(args.V, sft)
    res = capacity_lp(sft, V, exact=not args.float)
    out = {"V": str(V), **res.as_dict()}
    if args.max_period:
        upper, witness = capacity_orbit_upper(sft, V, args.max_period)
        out["orbit_upper"] = str(upper)
        out["orbit_witness"] = str(witness)
    _dump(out)
    return 0


def cmd_bk_profile(args) -> int:
    sft = parse_sft(args.sft)
    mu = parse_measure(args.measure, sft)
    x = parse_point(args.point)
    prof = bk_profile(x, mu, args.m, args.N)
    if args.csv:
        write_profile_csv(prof, Path(args.csv))
    _dump({"x": str(x), "measure": mu.label, "m": args.m, "N": args.N, **prof.summary()})
    return 0


def cmd_rate_mu(args) -> int:
    sft = parse_sft(args.sft)
    mu = parse_measure(args.measure, sft)
    x = parse_point(args.point)
    if args.direct:
        unions = [parse_union(u, sft) for u in args.union]
        est = rate_mu_direct(x, mu, args.m[0], args.L, unions)
    else:
        est = rate_mu_bowen(x, mu, args.m, args.N, tol=args.tol)
    _emit_estimate(est, args.csv)
    return 0


def cmd_rate_a1(args) -> int:
    sft = parse_sft(args.sft)
    x = parse_point(args.point)
    cands = [parse_union(u, sft) for u in args.union]
    est = rate_a1(x, args.m, args.L, sft, cands, exhaustive_limit=args.exhaustive_limit,
                  exact=not args.float)
    _emit_estimate(est, None)
    return 0


def cmd_rate_a2(args) -> int:
    sft = parse_sft(args.sft)
    x = parse_point(args.point)
    lo, hi = args.N_range
    est = rate_a2_profile(x, args.m_e, args.m_d, range(lo, hi + 1), sft)
    _emit_estimate(est, args.csv)
    return 0


def cmd_first_time(args) -> int:
    sft = parse_sft(args.sft)
    x = parse_point(args.point)
    V = parse_union(args.V, sft)
    if args.measure:
        mu = parse_measure(args.measure, sft)
        s = first_sensitive_time_measure(x, V, args.m, mu)
        kind = "s_mu"
    else:
        s = first_sensitive_time_top(x, V, args.m, sft)
        kind = "s_top"
    _dump({"x": str(x), "V": str(V), "m": args.m, kind: s if math.isfinite(s) else math.inf})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="senstropy",
        description="Time-restricted sensitivity and entropy on subshifts of finite type.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification scenarios")
    v.add_argument("scenario", nargs="*", help="scenario YAML files")
    v.add_argument("--default", action="store_true", help="run the bundled scenario suite")
    v.add_argument("--out", help="output directory for report files")
    v.add_argument("--format", action="append", choices=["json", "csv", "text"],
                   help="report format(s); repeatable (default json)")
    v.add_argument("--seed", type=int, help="override the sampling seed of every scenario")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("entropy", help="topological entropy of an SFT")
    e.add_argument("sft", help='e.g. "k=2; A=[[1,1],[1,0]]"')
    e.add_argument("--L", type=int, default=40, help="word length for the growth estimate")
    e.set_defaults(func=cmd_entropy)

    c = sub.add_parser("capacity", help="capacity of a cylinder union")
    c.add_argument("sft")
    c.add_argument("V", help='comma separated words, e.g. "00,10,11"')
    c.add_argument("--float", action="store_true", help="floating-point simplex")
    c.add_argument("--max-period", type=int, default=0,
                   help="also report the periodic-orbit upper bound")
    c.set_defaults(func=cmd_capacity)

    def point_args(q, measure: bool):
        q.add_argument("--sft", required=True)
        if measure:
            q.add_argument("--measure", required=True,
                           help='"bernoulli p0 p1", "markov P=[[..]]", or "orbit w"')
        q.add_argument("--point", required=True, help='eventually periodic point "pre:period"')

    b = sub.add_parser("bk-profile", help="Brin-Katok profile -log mu(B_n)/n")
    point_args(b, True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--csv", help="write the profile here")
    b.set_defaults(func=cmd_bk_profile)

    r = sub.add_parser("rate-mu", help="1/a_mu from Bowen balls, or the direct infimum")
    point_args(r, True)
    r.add_argument("--m", type=_ints, required=True, help='scales, e.g. "2,4,6"')
    r.add_argument("--N", type=int, default=2000)
    r.add_argument("--tol", type=float, default=1e-2, help="cross-scale convergence tolerance")
    r.add_argument("--direct", action="store_true", help="infimum over cylinders and unions")
    r.add_argument("--L", type=int, default=8, help="cylinder level cap for --direct")
    r.add_argument("--union", action="append", default=[], help="extra union for --direct")
    r.add_argument("--csv")
    r.set_defaults(func=cmd_rate_mu)

    a = sub.add_parser("rate-a1", help="1/a_1 over positive-capacity unions")
    point_args(a, False)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--L", type=int, required=True)
    a.add_argument("--exhaustive-limit", type=int, default=8)
    a.add_argument("--union", action="append", default=[], help="extra candidate union")
    a.add_argument("--float", action="store_true")
    a.set_defaults(func=cmd_rate_a1)

    a2 = sub.add_parser("rate-a2", help="1/a_2 from the first sensitive time in Bowen cylinders")
    point_args(a2, False)
    a2.add_argument("--m-e", type=int, required=True)
    a2.add_argument("--m-d", type=int, required=True)
    a2.add_argument("--N-range", type=int, nargs=2, required=True, metavar=("FIRST", "LAST"))
    a2.add_argument("--csv")
    a2.set_defaults(func=cmd_rate_a2)

    f = sub.add_parser("first-time", help="first sensitive time of x with respect to V")
    f.add_argument("--sft", required=True)
    f.add_argument("--point", required=True)
    f.add_argument("--V", required=True)
    f.add_argument("--m", type=int, required=True)
    f.add_argument("--measure", help="restrict to the support of this measure")
    f.set_defaults(func=cmd_first_time)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None and args.command == "verify":
        args.format = ["json"]
    try:
        return args.func(args)
    except (ConfigError, SftError, MeasureError, ValueError) as exc:
        print(f"senstropy: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LPError as exc:
        print(f"senstropy: solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"senstropy: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
