"""Command-line interface: analyze / matrices / identity.

Exit codes for ``analyze``: 0 = FLAT (rank equals the bound), 1 = NOT-FLAT,
2 = not calibrated (bound-only report), 3 = not ordinary at any sample,
4 = input or processing error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gmpy2 import mpq

from . import corpus
from .analysis import AnalysisResult, analyze
from .errors import WebCurvError
from .expr import Binding, WebSpec, expr_to_str, parse_webfile

SCHEMA_VERSION = 1


def _parse_builtin(text: str):
    name, _, rest = text.partition(":")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise WebCurvError(f"bad builtin parameter {item!r} (expected k=v)")
            kwargs[key.strip()] = value.strip()
    return name.strip(), kwargs


def _load_web(args) -> WebSpec:
    if args.builtin:
        name, kwargs = _parse_builtin(args.builtin)
        web = corpus.generate(name, **kwargs)
    elif args.web:
        web = parse_webfile(Path(args.web).read_text())
    else:
        raise WebCurvError("one of --web FILE or --builtin ID is required")
    if args.g_order is not None:
        params = {
            n: Binding.nilpotent(args.g_order) if b.kind == "nilpotent" else b
            for n, b in web.params.items()
        }
        web = WebSpec(web.n, web.integrals, params, web.notes)
    return web


def _parse_at(text):
    return [mpq(part) for part in text.split(",")]


def _binding_json(b: Binding):
    if b.kind == "rational":
        return {"kind": "rational", "value": str(b.value)}
    return {"kind": "nilpotent", "order": b.order}


def _witness_json(w):
    if w is None:
        return None
    return {"r": w.r, "s": w.s, "row": w.row, "col": w.col, "value": w.value}


def _result_json(result: AnalysisResult, settings: dict) -> dict:
    web, dims = result.web, result.dims
    points = []
    for p in result.points:
        o = p.ordinariness
        points.append(
            {
                "coords": [str(x) for x in p.point.coords],
                "attempt": p.point.attempt,
                "permutation": p.permutation,
                "ordinary": p.ordinary if o is not None else None,
                "weak_general_position": o.weak_general_position if o else None,
                "mm_rank": o.mm_rank if o else None,
                "pp_rank": o.pp_rank if o else None,
                "flat": p.flat,
                "flat_at_zero_deformation": p.flat_at_zero_deformation,
                "deformation_nonzero": p.deformation_nonzero,
                "witness": _witness_json(p.witness),
                "invariant_flat_prefix": p.prefix,
                "discarded": p.discarded,
                "error": p.error,
            }
        )
    return {
        "schema": SCHEMA_VERSION,
        "web": {
            "n": web.n,
            "d": web.d,
            "integrals": [expr_to_str(e) for e in web.integrals],
            "params": {n: _binding_json(b) for n, b in sorted(web.params.items())},
            "notes": list(web.notes),
        },
        "dims": {
            "n": dims.n,
            "d": dims.d,
            "k0": dims.k0,
            "calibrated": dims.calibrated,
            "alpha": dims.alpha,
            "beta": dims.beta,
            "ro": dims.ro,
            "pi_prime": dims.ro,
        },
        "settings": settings,
        "points": points,
        "verdict": result.verdict,
        "rank": result.rank,
        "rank_bounds": list(result.rank_bounds) if result.rank_bounds else None,
    }


def _print_json(payload):
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _print_human(result: AnalysisResult):
    dims = result.dims
    print(f"web: n={dims.n} d={dims.d} k0={dims.k0} calibrated={dims.calibrated}")
    print(
        f"dims: alpha={dims.alpha} beta={dims.beta} "
        f"rank bound pi'={dims.ro}"
    )
    if result.verdict == "NOT_CALIBRATED":
        print("web is not calibrated: connection undefined, reporting the bound only")
        print(f"rank <= {dims.ro}")
        return
    for idx, p in enumerate(result.points):
        if p.error:
            print(f"point {idx}: ERROR {p.error} (discarded: {len(p.discarded)})")
            continue
        o = p.ordinariness
        line = (
            f"point {idx}: {p.point}  ordinary={p.ordinary} "
            f"(WGP={o.weak_general_position}, rank MM={o.mm_rank}/{dims.beta}, "
            f"PP={o.pp_rank}/{dims.d})"
        )
        if p.flat is not None:
            line += f" flat={p.flat}"
        if p.deformation_nonzero:
            line += (
                f" [constant part zero: {p.flat_at_zero_deformation};"
                " deformation part nonzero]"
            )
        if p.permutation is not None:
            line += f" permutation={p.permutation}"
        print(line)
        if p.witness is not None:
            w = p.witness
            print(
                f"  curvature witness: K({w.r},{w.s})[{w.row},{w.col}] = {w.value}"
            )
        if p.prefix is not None:
            print(f"  invariant flat prefix: first {p.prefix} basis vectors")
        if p.discarded:
            print(f"  resamples before this point: {len(p.discarded)}")
    print(f"verdict: {result.verdict}")
    if result.rank is not None:
        print(f"rank = {result.rank}")
    elif result.rank_bounds is not None:
        lo, hi = result.rank_bounds
        print(f"rank bounds: {lo} <= rank <= {hi}")
    n_pts = len([p for p in result.points if p.error is None])
    print(
        f"note: flatness verified at {n_pts} exact rational point(s); "
        "vanishing everywhere holds with high probability, not as a proof"
    )
    print(f"timing: {result.timings.get('total', 0):.2f}s", file=sys.stderr)


def cmd_analyze(args) -> int:
    web = _load_web(args)
    at = _parse_at(args.at) if args.at else None
    result = analyze(
        web,
        n_points=args.points,
        seed=args.seed,
        height=args.height,
        order=args.order,
        at=at,
        try_permutations=args.try_permutations,
        prefix_scan=args.prefix_scan,
        jobs=args.jobs,
    )
    if args.json:
        settings = {
            "points": args.points,
            "seed": args.seed,
            "height": args.height,
            "order": result.order,
            "try_permutations": args.try_permutations,
        }
        _print_json(_result_json(result, settings))
    else:
        _print_human(result)
    return result.exit_code


def _matrix_strings(mat, ctx):
    from .connection import _format_jet

    return [[_format_jet(e, ctx) for e in row] for row in mat.data]


def cmd_matrices(args) -> int:
    web = _load_web(args)
    at = _parse_at(args.at) if args.at else None
    result = analyze(
        web,
        n_points=1,
        seed=args.seed,
        height=args.height,
        order=args.order,
        at=at,
        try_permutations=args.try_permutations,
        keep_matrices=True,
    )
    usable = [p for p in result.points if p.matrices]
    if not usable:
        print("no matrices available (see analyze for diagnostics)", file=sys.stderr)
        return result.exit_code if result.exit_code else 4
    p = usable[0]
    m = p.matrices
    ctx = m["ctx"]
    named = [("MM", m["MM"]), ("QQ", m["QQ"]), ("PP", m["PP"]), ("U", m["U"]), ("W", m["W"])]
    named += [(f"A({i + 1})", a) for i, a in enumerate(m["A"])]
    named += [(f"K({r},{s})", k) for (r, s), k in sorted(m["K"].items())]
    if args.json:
        payload = {
            "schema": SCHEMA_VERSION,
            "point": [str(x) for x in p.point.coords],
            "matrices": {
                name: {
                    "rows": mat.rows,
                    "cols": mat.cols,
                    "entries": _matrix_strings(mat, ctx),
                }
                for name, mat in named
            },
        }
        _print_json(payload)
    else:
        print(f"matrices at point {p.point}")
        for name, mat in named:
            print(f"{name} ({mat.rows}x{mat.cols}):")
            for row in _matrix_strings(mat, ctx):
                print("  [" + ", ".join(row) + "]")
    return result.exit_code


def cmd_identity(args) -> int:
    rows = []
    ok = True
    for n in range(2, args.max_n + 1):
        combinatorial, bound = corpus.wb_rank_identity(n)
        rows.append((n, combinatorial, bound))
        ok = ok and combinatorial == bound
    if args.json:
        _print_json(
            {
                "schema": SCHEMA_VERSION,
                "rows": [
                    {"n": n, "combinatorial": a, "pi_prime": b, "pass": a == b}
                    for n, a, b in rows
                ],
                "pass": ok,
            }
        )
    else:
        print("n  6*C(n,2)+8*C(n,3)+3*C(n,4)  pi'(n,c(n,4))  status")
        for n, a, b in rows:
            print(f"{n}  {a}  {b}  {'pass' if a == b else 'FAIL'}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="webcurv",
        description=(
            "Decide whether a calibrated ordinary d-web given by first "
            "integrals has maximal rank, by exact evaluation of the "
            "curvature of its tautological connection at rational points."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--web", help=".web input file")
        p.add_argument(
            "--builtin",
            help="builtin web ID[:k=v,...], one of: " + ", ".join(corpus.BUILTIN_NAMES),
        )
        p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
        p.add_argument("--height", type=int, default=1000, help="rational height bound")
        p.add_argument("--order", type=int, default=None, help="jet order (default k0+1)")
        p.add_argument(
            "--g-order", type=int, default=None,
            help="nilpotency order for nilpotent-bound parameters",
        )
        p.add_argument(
            "--try-permutations", type=int, default=0, metavar="P",
            help="on a singular trivialization, retry with up to P seeded "
            "permutations of the integral list",
        )
        p.add_argument("--at", help="explicit rational point c1,c2,... (skips sampling)")
        p.add_argument("--json", action="store_true", help="JSON report on stdout")

    p_analyze = sub.add_parser("analyze", help="full flatness / rank analysis")
    add_common(p_analyze)
    p_analyze.add_argument("--points", type=int, default=3, help="sample point count")
    p_analyze.add_argument(
        "--prefix-scan", action=argparse.BooleanOptionalAction, default=True,
        help="on NOT-FLAT, scan for the largest invariant flat basis prefix",
    )
    p_analyze.add_argument("--jobs", type=int, default=1, help="parallel point workers")
    p_analyze.set_defaults(func=cmd_analyze)

    p_mat = sub.add_parser("matrices", help="print the pipeline matrices at one point")
    add_common(p_mat)
    p_mat.set_defaults(func=cmd_matrices)

    p_id = sub.add_parser("identity", help="check the rank-count identity for wb webs")
    p_id.add_argument("--max-n", type=int, default=8)
    p_id.add_argument("--json", action="store_true")
    p_id.set_defaults(func=cmd_identity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WebCurvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
