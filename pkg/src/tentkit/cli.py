"""Command line front end: norm evaluation, kernel extension, suites, reports."""

from __future__ import annotations

import argparse
import json
import sys

from .core import (
    INF,
    Domain,
    ExponentTuple,
    boundary_from_csv,
    load_hsf1,
    save_hsf1,
)
from .dyadic import dyadic_tent_norm, local_means
from .harness import (
    SUITE_NAMES,
    parse_config,
    parse_exponent,
    read_reports,
    reports_to_csv,
    run_suites,
    summarize,
    write_reports,
)
from .kernels import KernelSpec, extend, gauss_weierstrass, heat, lp_block
from .quadrature import WHITNEY, AverageSpec
from .tent_norms import (
    beyond_infinity_norm,
    change_of_angle_norm,
    jn_norm,
    tent_norm,
    z_norm,
)

__all__ = ["main"]

_KINDS = ("tent", "z", "coa", "jn", "beyond", "dyadic")


def _domain_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--side", type=float, default=4.0, help="torus side length, power of two")
    sub.add_argument("--n-space", type=int, default=128, help="cells per axis, power of two")
    sub.add_argument("--s-min", type=float, default=0.125, help="smallest scale")
    sub.add_argument("--s-max", type=float, default=2.0, help="largest scale")
    sub.add_argument("--m-scale", type=int, default=4, help="scale lattice points per octave")


def _domain_from_args(args) -> Domain:
    return Domain(d=1, side=args.side, n_space=args.n_space, s_min=args.s_min,
                  s_max=args.s_max, m_scale=args.m_scale)


def _parse_kernel(text: str) -> KernelSpec:
    if text == "heat":
        return heat()
    if text == "lp_block":
        return lp_block()
    if text.startswith("gw:"):
        return gauss_weierstrass(int(text[3:]))
    raise ValueError(f"unknown kernel {text!r}; want heat, lp_block, or gw:N")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tentkit", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_norm = subs.add_parser("norm", help="evaluate one norm of a stored field")
    p_norm.add_argument("field", help="path to an .hsf1 field file")
    p_norm.add_argument("--kind", choices=_KINDS, default="tent")
    p_norm.add_argument("--p", default="2", help="outer exponent, number or inf")
    p_norm.add_argument("--q", default="2", help="scale exponent, number or inf")
    p_norm.add_argument("--r", default="2", help="averaging exponent, number or inf")
    p_norm.add_argument("--beta", default="0", help="scale weight exponent")
    p_norm.add_argument("--alpha", default="1", help="outer power for jn, decay rate for beyond")
    p_norm.add_argument("--aperture", default="1", help="cone dilation for coa")
    p_norm.add_argument("--window", nargs=2, type=float, default=(0.5, 1.0), metavar=("A", "B"),
                        help="scale window fractions of the averaging region")
    p_norm.add_argument("--ball", type=float, default=1.0, help="spatial radius factor of the averaging region")

    p_ext = subs.add_parser("extend", help="extend d=1 boundary CSV data into the half space")
    p_ext.add_argument("boundary", help="CSV rows of cell index, value")
    p_ext.add_argument("--out", required=True, help="output .hsf1 path")
    p_ext.add_argument("--kernel", default="heat", help="heat, lp_block, or gw:N")
    _domain_args(p_ext)

    p_suite = subs.add_parser("suite", help="run verification suites against a config")
    p_suite.add_argument("names", nargs="+", help=f"suite names ({', '.join(SUITE_NAMES)}) or all")
    p_suite.add_argument("config", help="INI config path")
    p_suite.add_argument("--out", default="report.jsonl", help="JSONL report path")

    p_rep = subs.add_parser("report", help="summarize JSONL reports, optionally export")
    p_rep.add_argument("files", nargs="+", help="JSONL report paths")
    p_rep.add_argument("--csv", help="write a flat CSV table here")
    p_rep.add_argument("--json", dest="json_out", help="write a merged JSON array here")

    return parser


def _cmd_norm(args) -> int:
    field = load_hsf1(args.field)
    e = ExponentTuple(parse_exponent(args.p), parse_exponent(args.q),
                      parse_exponent(args.r), float(args.beta))
    a, b = args.window
    spec = WHITNEY if (a, b, args.ball) == (0.5, 1.0, 1.0) else AverageSpec(a, b, args.ball)
    kind = args.kind
    if kind == "tent":
        value = tent_norm(field, e, spec).value
    elif kind == "z":
        value = z_norm(field, e).value
    elif kind == "coa":
        value = change_of_angle_norm(field, e, float(args.aperture), spec).value
    elif kind == "jn":
        value = jn_norm(field, e, parse_exponent(args.alpha), spec).value
    elif kind == "beyond":
        value = beyond_infinity_norm(field, e.q, e.beta, parse_exponent(args.alpha)).value
    else:
        lm = local_means(field, e.r)
        value = dyadic_tent_norm(lm, e).value
    print(f"{value:.17g}")
    return 0


def _cmd_extend(args) -> int:
    dom = _domain_from_args(args)
    boundary = boundary_from_csv(dom, args.boundary)
    field = extend(boundary, _parse_kernel(args.kernel))
    save_hsf1(field, args.out)
    print(f"wrote {args.out}: {dom.n_scales} scales x {dom.n_space} cells")
    return 0


def _cmd_suite(args) -> int:
    cfg = parse_config(args.config)
    names = tuple(args.names)
    if names == ("all",):
        names = SUITE_NAMES
    reports = run_suites(cfg, names)
    write_reports(args.out, reports)
    text, failed = summarize([rep.to_obj() for rep in reports])
    print(text)
    print(f"wrote {len(reports)} reports to {args.out}")
    return 1 if failed else 0


def _cmd_report(args) -> int:
    objs = []
    for path in args.files:
        objs.extend(read_reports(path))
    if args.csv:
        reports_to_csv(args.csv, objs)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(objs, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
    text, failed = summarize(objs)
    print(text)
    return 1 if failed else 0


_COMMANDS = {
    "norm": _cmd_norm,
    "extend": _cmd_extend,
    "suite": _cmd_suite,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"tentkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
