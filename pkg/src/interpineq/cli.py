"""Command-line entry point: ``interpineq <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np
import yaml

from . import constants
from .corpus import CorpusSpec
from .czd import CzHeightError, cz_decompose, validate_cz
from .harness.checks import INTERPOLATION, TheoremId
from .harness.search import FAMILIES, SearchSpec, sharpness_search
from .harness.suite import (
    ConfigError,
    default_config_path,
    load_config,
    reports_csv,
    run_suite,
    write_csv_atomic,
)
from .lattice import DyadicCube, FieldFileError, integrate_abs_pow, read_field, write_field
from .norms import (
    CubeFamily,
    FamilyBudgetError,
    bmo_norm,
    layer_cake_lq,
    linf_norm,
    lp_norm,
    morrey_norm,
    weak_lp_norm,
    weak_morrey_norm,
)

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
NORMS = ("lp", "weak_lp", "linf", "layer_cake", "bmo", "morrey", "weak_morrey")


def _family(args) -> CubeFamily:
    return CubeFamily(args.family, args.max_cell_visits)


def _add_family(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("grid_aligned", "dyadic_only"), default="grid_aligned")
    p.add_argument("--max-cell-visits", type=int, default=10**8)


def cmd_norm(args) -> int:
    f = read_field(args.field)
    if args.norm in ("lp", "weak_lp", "layer_cake", "morrey", "weak_morrey") and args.p is None:
        raise SystemExit(f"error: --p is required for {args.norm}")
    if args.norm in ("morrey", "weak_morrey") and args.kappa is None:
        raise SystemExit(f"error: --kappa is required for {args.norm}")
    fam = _family(args)
    value = {
        "lp": lambda: lp_norm(f, args.p),
        "weak_lp": lambda: weak_lp_norm(f, args.p),
        "linf": lambda: linf_norm(f),
        "layer_cake": lambda: layer_cake_lq(f, args.p),
        "bmo": lambda: bmo_norm(f, fam),
        "morrey": lambda: morrey_norm(f, args.p, args.kappa, fam),
        "weak_morrey": lambda: weak_morrey_norm(f, args.p, args.kappa, fam),
    }[args.norm]()
    print(repr(float(value)))
    return EXIT_OK


def _box_cube(d, q: DyadicCube) -> DyadicCube:
    # a padding ancestor carries all the mass of the box
    if q.level <= d.padding:
        return DyadicCube.root(d.box)
    return DyadicCube(q.level - d.padding, q.index, d.box)


def cmd_czd(args) -> int:
    f = read_field(args.field)
    if args.sigma == "bmo":
        sigma = float(bmo_norm(f, _family(args)) ** args.p)
    else:
        sigma = float(args.sigma)
    try:
        d = cz_decompose(f, args.p, sigma)
    except CzHeightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"sigma {sigma!r} p {args.p!r} padding {d.padding} selected {len(d.selected)}")
    for q in d.selected:
        avg = float(integrate_abs_pow(f, args.p, _box_cube(d, q)) / q.measure)
        print(f"cube level {q.level} index {' '.join(map(str, q.index))} measure {float(q.measure)!r} average {avg!r}")
    print(f"good measure {float(d.good_measure)!r}")
    violations = validate_cz(f, args.p, d)
    for v in violations:
        print(f"violation {v.kind}: {v.detail}")
    return EXIT_FAIL if violations else EXIT_OK


def _q_values(args) -> list[float]:
    if args.q:
        return args.q
    return [float(q) for q in np.geomspace(args.q_min, args.q_max, args.points)]


def cmd_constants(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("p", "q", "n", "kind", "log_value", "value", "ratio_to_q"))
    for q in _q_values(args):
        for kind, fn in (("lebesgue", constants.c_lebesgue), ("morrey", constants.c_morrey)):
            rep = fn(args.p, q, args.n)
            ratio = constants.growth_ratio(args.p, args.n, q, morrey=kind == "morrey")
            w.writerow((repr(args.p), repr(q), args.n, kind, repr(rep.log_value), repr(rep.value), repr(ratio)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("p", "n", "q", "c_lebesgue", "c_morrey", "growth_lebesgue", "growth_morrey"))
        for q in _q_values(args):
            w.writerow(
                (
                    repr(args.p), args.n, repr(q),
                    repr(constants.c_lebesgue(args.p, q, args.n).value),
                    repr(constants.c_morrey(args.p, q, args.n).value),
                    repr(constants.growth_ratio(args.p, args.n, q)),
                    repr(constants.growth_ratio(args.p, args.n, q, morrey=True)),
                )
            )
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config or default_config_path())
    result = run_suite(cfg)
    text = reports_csv(result.reports)
    if args.csv:
        write_csv_atomic(text, args.csv)
    if not args.quiet:
        print(result.summary())
    return result.exit_code


def cmd_search(args) -> int:
    bounds = tuple(args.bounds) if args.bounds else ((0.0, 3.0) if args.search_family == "radial_log" else (0.0, 1.0))
    spec = SearchSpec(
        theorem=TheoremId(args.theorem),
        family=args.search_family,
        dimension=args.dimension,
        budget=args.budget,
        tolerance=args.tolerance,
        p=args.p,
        q=args.q,
        kappa=args.kappa,
        level=args.level,
        half_side=args.half_side,
        bounds=bounds,
        seed=args.seed,
    )
    res = sharpness_search(spec)
    r = res.report
    print(json.dumps(
        {
            "theorem": str(r.theorem),
            "ratio": r.ratio,
            "lhs": r.lhs,
            "rhs": r.rhs,
            "evaluations": res.evaluations,
            "params": [float(x) for x in res.params],
        },
        indent=2,
    ))
    return EXIT_OK


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, yaml.safe_load(value)


def cmd_gen(args) -> int:
    entry = {"kind": args.kind, "dim": args.dim, "level": args.level, "half_side": args.half_side,
             "params": dict(args.param)}
    spec = CorpusSpec.from_dict(entry)
    f = spec.build()
    write_field(args.out, f)
    print(f"wrote {spec.name} to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="interpineq", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="compute one norm of a field file")
    p.add_argument("field")
    p.add_argument("norm", choices=NORMS)
    p.add_argument("--p", type=float)
    p.add_argument("--kappa", type=float)
    _add_family(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("czd", help="Calderón–Zygmund decomposition of a field file")
    p.add_argument("field")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--sigma", default="bmo", help="height, or 'bmo' for ||f||_BMO**p")
    _add_family(p)
    p.set_defaults(func=cmd_czd)

    for name, func, helptext in (
        ("constants", cmd_constants, "table of embedding constants"),
        ("sweep", cmd_sweep, "CSV of constants and growth ratios over q"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--p", type=float, default=1.0)
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--q", type=float, nargs="+")
        p.add_argument("--q-min", type=float, default=2.0)
        p.add_argument("--q-max", type=float, default=1e4)
        p.add_argument("--points", type=int, default=13)
        if name == "sweep":
            p.add_argument("--out", help="CSV path (default stdout)")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="run a verification config")
    p.add_argument("config", nargs="?", help="YAML config (default: the bundled one)")
    p.add_argument("--csv", help="write the report CSV here")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="local search for near-extremal fields")
    p.add_argument("theorem", choices=[str(t) for t in INTERPOLATION])
    p.add_argument("--family", dest="search_family", choices=FAMILIES, default="cells")
    p.add_argument("--dimension", type=int, default=8)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--kappa", type=float)
    p.add_argument("--level", type=int, default=8)
    p.add_argument("--half-side", type=float, default=1.0)
    p.add_argument("--bounds", type=float, nargs=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("gen", help="write a corpus field to a file")
    p.add_argument("kind")
    p.add_argument("out")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--level", type=int, default=8)
    p.add_argument("--half-side", default="1")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FieldFileError, FamilyBudgetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
