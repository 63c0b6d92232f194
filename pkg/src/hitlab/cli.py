"""Command line entry point: ``hitlab <command> ...``.

Every command prints (or writes with ``-o``) one JSON document with sorted
keys, so identical arguments give byte-identical output.  Input validation
failures exit with status 2 and an error JSON; ``report`` exits with 1 when
a criterion misses its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance, geometry, hit, network, nogo, tiling
from .tensorcore import PairingState


class InputError(ValueError):
    pass


# ------------------------------------------------------------------ helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})")


def parse_family(text: str) -> hit.HitSpec:
    """``left_right:3``, ``star:4:2``, ``l_shift:5:1,2`` or ``product:a+b``."""
    if text.startswith("product:"):
        parts = text[len("product:"):].split("+")
        spec = parse_family(parts[0])
        for p in parts[1:]:
            spec = hit.hit_tensor_product(spec, parse_family(p))
        return spec
    name, *args = text.split(":")
    try:
        if name == "left_right" and len(args) == 1:
            return hit.make_left_right(int(args[0]))
        if name == "star" and len(args) in (1, 2):
            return hit.make_star(int(args[0]), int(args[1]) if len(args) == 2 else 1)
        if name == "l_shift" and len(args) == 2:
            return hit.make_l_shift(int(args[0]), [int(x) for x in args[1].split(",")])
    except ValueError as exc:
        raise InputError(str(exc))
    raise InputError(f"cannot parse family {text!r}")


def load_spec(args) -> hit.HitSpec:
    if getattr(args, "spec", None):
        try:
            return hit.HitSpec.from_json(_load_json(args.spec))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad spec file: {exc}")
    if getattr(args, "family", None):
        return parse_family(args.family)
    raise InputError("give --spec FILE or --family NAME")


def load_tiling(args) -> tiling.TilingGraph:
    if getattr(args, "tiling", None):
        try:
            return tiling.TilingGraph.from_json(_load_json(args.tiling))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad tiling file: {exc}")
    if getattr(args, "pql", None):
        try:
            p, q, l = (int(x) for x in args.pql.split(","))
            return tiling.build_tiling(p, q, l)
        except ValueError as exc:
            raise InputError(str(exc))
    raise InputError("give --tiling FILE or --pql p,q,layers")


def parse_region(text: str, n: int) -> tiling.BoundaryRegion:
    try:
        start, length = (int(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"region must be START:LENGTH, got {text!r}")
    r = tiling.BoundaryRegion(start % n, length, n)
    if not r.is_proper:
        raise InputError(f"region length must be in 1..{n - 1}")
    return r


def read_config(path: str) -> dict:
    """Simple ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip('"')
    return out


# ----------------------------------------------------------------- commands


def cmd_tiling(args) -> dict:
    try:
        g = tiling.build_tiling(args.p, args.q, args.layers)
    except ValueError as exc:
        raise InputError(str(exc))
    if args.svg:
        Path(args.svg).write_text(tiling.to_svg(g))
    return g.to_json()


def cmd_verify(args) -> dict:
    spec = load_spec(args)
    rep = hit.verify_all(spec, args.tol)
    return {"spec": spec.to_json(), **rep.to_json(), "_failed": not rep.passed}


def cmd_entropy(args) -> dict:
    g, spec = load_tiling(args), load_spec(args)
    try:
        state = network.assemble(g, spec)
    except ValueError as exc:
        raise InputError(str(exc))
    n = g.n_boundary
    regions = [parse_region(r, n) for r in args.region] if args.region else tiling.contiguous_regions(n)
    rows = []
    for r in regions:
        cut = tiling.minimal_cut(g, r)
        rows.append({"start": r.start, "length": r.length, "entropy": network.boundary_entropy(state, r),
                     "graph_length": tiling.graph_length(cut)})
    out = {"rows": rows}
    if len(regions) >= 2 and len({row["graph_length"] for row in rows}) > 1:
        fit = network.rt_fit(state, regions)
        out["fit"] = {"slope": fit.slope, "intercept": fit.intercept, "max_residual": fit.max_residual}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["start", "length", "entropy", "graph_length"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return {"_csv": buf.getvalue()}
    return out


def cmd_corr(args) -> dict:
    try:
        b = network.correlation_k_budget(args.n, args.xi, args.m)
    except ValueError as exc:
        raise InputError(str(exc))
    return {"n": args.n, "xi": args.xi, "m": args.m, **b.__dict__}


def cmd_length(args) -> dict:
    spec = load_spec(args)
    if not (args.tiling or args.pql):
        return geometry.length_contribution(spec).to_json()
    g = load_tiling(args)
    state = network.assemble(g, spec)
    if not args.region:
        raise InputError("--region START:LENGTH is required with a tiling")
    r = parse_region(args.region[0], g.n_boundary)
    cut = tiling.minimal_cut(g, r)
    rep = geometry.length_expectation(state, cut, args.method)
    out = rep.to_json()
    out["cut_edges"] = sorted(cut.edges)
    return out


def cmd_area(args) -> dict:
    spec = load_spec(args)
    try:
        rep = geometry.vertex_area(spec)
    except ValueError as exc:
        raise InputError(str(exc))
    return rep.to_json()


def cmd_angle(args) -> dict:
    spec = load_spec(args)
    try:
        a = geometry.vertex_angle(spec, args.e1, args.e2)
    except ValueError as exc:
        raise InputError(str(exc))
    out = a.to_json()
    if args.tiling or args.pql:
        g = load_tiling(args)
        s = geometry.polygon_angle_sum(a.alpha, geometry.dual_polygon_pattern(g))
        out.update({"angle_sum": s.total, "deficit": s.deficit, "corners": s.n_corners, "alpha_units": s.units})
    return out


def cmd_nogo(args) -> dict:
    case = args.case
    if case == "two-uniform":
        if args.n < 4:
            raise InputError("n >= 4 is required")
        if 2**args.n > nogo.MAX_DIM:
            raise InputError(f"n = {args.n} exceeds 12 qubits")
        sym = {"su2": "SU2", "u1": nogo.GeneratorSpec.total_jz(args.n), "none": None}[args.symmetry]
        cert = nogo.min_two_uniform_deviation(args.n, symmetry=sym, seed=args.seed, starts=args.starts,
                                              grid_points=args.grid)
        return cert.to_json()
    if case == "evenbly":
        rng = np.random.default_rng(args.seed)
        reports = []
        for t in range(args.samples):
            n = (2, 4, 6)[t % 3]
            from .tensorcore import DenseTensor

            v = nogo.random_invariant_state(n, rng)
            reports.append(nogo.check_evenbly_code(DenseTensor.from_vector(v, [1] * n)).to_json())
        control = nogo.check_evenbly_code(nogo.perfect_tensor()).to_json()
        return {"seed": args.seed, "samples": args.samples,
                "both_pass": sum(not r["at_most_one"] for r in reports), "perfect_tensor_control": control}
    if case == "bipartitions":
        if args.n < 1 or 2 * args.n > 12:
            raise InputError("n must satisfy 1 <= 2n <= 12")
        dims = [2] * (2 * args.n)
        count = nogo.count_mm_balanced_bipartitions(nogo.opposite_singlets(args.n), dims)
        out = {"n": args.n, "opposite_singlets": count, "bound": 2 ** (args.n - 1), "seed": args.seed}
        if args.samples:
            rng = np.random.default_rng(args.seed)
            worst = max(nogo.count_mm_balanced_bipartitions(nogo.random_invariant_state(2 * args.n, rng), dims)
                        for _ in range(args.samples))
            out["max_over_invariant_samples"] = worst
        return out
    if case == "geomeasure":
        if args.m < 0 or args.d < 2:
            raise InputError("need m >= 0 and d >= 2")
        formula = nogo.geometric_measure_pairing(
            PairingState(2 * args.m, tuple((2 * i, 2 * i + 1) for i in range(args.m))), args.d)
        out = {"m": args.m, "d": args.d, "formula": formula, "seed": args.seed}
        if args.m:
            vec, dims = nogo.max_entangled_pairs(args.m, args.d)
            out["numeric"] = nogo.geometric_measure_numeric(vec, dims, args.seed)
        return out
    raise InputError(f"unknown case {case!r}")


def cmd_report(args) -> dict:
    selected = {int(x) for x in args.only.split(",")} if args.only else None
    if args.suite == "paper-constants":
        rows = acceptance.paper_constants()
        table = [{"name": n, "computed": a, "reference": b, "pass": ok} for n, a, b, ok in rows]
        return {"suite": args.suite, "rows": table, "_failed": not all(r["pass"] for r in table)}
    results = acceptance.run_all(selected)
    for r in results:
        print(r.line(), file=sys.stderr)
    return {"suite": args.suite, "criteria": [r.to_json() for r in results],
            "_failed": not all(r.passed for r in results)}


# ------------------------------------------------------------------- parser


def _add_spec(p):
    p.add_argument("--spec", help="HIT spec JSON file")
    p.add_argument("--family", help="family shorthand, e.g. left_right:3, star:4:1, l_shift:5:1,2")


def _add_tiling(p):
    p.add_argument("--tiling", help="tiling JSON file from 'hitlab tiling'")
    p.add_argument("--pql", help="build the tiling on the fly: p,q,layers")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hitlab", description="HIT tensor networks on hyperbolic tilings")
    ap.add_argument("--config", help="key = value file with default arguments")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--out", help="write output here instead of stdout")
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    # the same options are accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("-o", "--out", default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)
    ap._hitlab_subs = sub.choices
    _add_parser = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add_parser(*a, parents=[common], **kw)

    p = sub.add_parser("tiling", help="build a {p,q} patch")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("-l", "--layers", type=int, default=1)
    p.add_argument("--svg", help="also write an SVG drawing")
    p.set_defaults(fn=cmd_tiling)

    p = sub.add_parser("verify", help="check the HIT conditions")
    _add_spec(p)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("entropy", help="boundary entropies and RT fit")
    _add_tiling(p)
    _add_spec(p)
    p.add_argument("--region", action="append", help="START:LENGTH (repeatable); default all contiguous")
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("corr", help="Bell-pair budget for exp(-j/xi) correlations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.set_defaults(fn=cmd_corr)

    p = sub.add_parser("length", help="length operator")
    _add_tiling(p)
    _add_spec(p)
    p.add_argument("--region", action="append")
    p.add_argument("--method", choices=["formula", "insertion"], default="formula")
    p.set_defaults(fn=cmd_length)

    p = sub.add_parser("area", help="vertex area")
    _add_spec(p)
    p.set_defaults(fn=cmd_area)

    p = sub.add_parser("angle", help="vertex angle and polygon deficit")
    _add_spec(p)
    _add_tiling(p)
    p.add_argument("--e1", type=int, default=0)
    p.add_argument("--e2", type=int, default=1)
    p.set_defaults(fn=cmd_angle)

    p = sub.add_parser("nogo", help="no-go certificates")
    p.add_argument("--case", required=True, choices=["two-uniform", "evenbly", "bipartitions", "geomeasure"])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--symmetry", choices=["su2", "u1", "none"], default="su2")
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--grid", type=int, default=60)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(fn=cmd_nogo)

    p = sub.add_parser("report", help="run the acceptance criteria")
    p.add_argument("--suite", choices=["acceptance", "paper-constants"], default="acceptance")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(fn=cmd_report)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> None:
    """Config entries become parser defaults, so explicit flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    parsers = [ap, *ap._hitlab_subs.values()]
    dests = {a.dest for p in parsers for a in p._actions}
    unknown = sorted(set(cfg) - dests)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(unknown)}")
    for p in parsers:
        own = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in cfg.items() if k in own})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
    except (InputError, OSError) as exc:
        sys.stdout.write(dumps({"error": str(exc)}))
        return 2
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            return 0
        sys.stdout.write(dumps({"error": "invalid arguments", "argv": argv}))
        return 2
    try:
        result = args.fn(args)
    except InputError as exc:
        sys.stdout.write(dumps({"error": str(exc), "command": args.command}))
        return 2
    failed = bool(result.pop("_failed", False)) if isinstance(result, dict) else False
    text = result["_csv"] if isinstance(result, dict) and "_csv" in result else dumps(result)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
