"""Command-line front end.

Subcommands: ``catalog`` (list built-in algebras), ``jacobi`` (seeded
Jacobi audit), ``derive`` (half-derivation solves with interior ranks),
``tp`` (transposed Poisson verification from a product file) and
``compile`` (check a .liealg file).  Every command renders either a
human table or a JSON report validating docs/report.schema.json; given
the same configuration and seed the JSON is byte-identical apart from
the ``timestamp`` subtree.

Exit codes: 0 success / expectations met, 1 mathematical failure (with
a witness in the report), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction

from . import __version__
from . import derivations as dv
from . import dsl
from . import tpstruct as tp
from .algebra import AlgebraError, AlgebraSpec, format_symbol
from .catalog import CATALOG_NAMES, catalog, catalog_summary, delta_trivial
from .groups import GroupElement, format_element, parse_element
from .scalars import Scalar, ScalarParseError, format_scalar, parse_scalar

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# option plumbing
# ---------------------------------------------------------------------------

def _parse_box(text: str, what: str):
    boxes = []
    for part in text.split(","):
        lo, sep, hi = part.partition("..")
        if not sep:
            raise ConfigError(f"bad {what} interval {part!r}; write lo..hi")
        try:
            boxes.append((int(lo), int(hi)))
        except ValueError:
            raise ConfigError(f"bad {what} interval {part!r}") from None
    return boxes


def _parse_bindings(pairs):
    out = {}
    for item in pairs or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"bad binding {item!r}; write name=value")
        out[name.strip()] = value.strip()
    return out


def _algebra_from_args(args) -> AlgebraSpec:
    bindings = _parse_bindings(getattr(args, "bind", None))
    lam = getattr(args, "lam", None)
    if lam is not None:
        bindings.setdefault("lambda", lam)
    generators = args.gens.split(",") if getattr(args, "gens", None) else None
    rank = getattr(args, "rank", None)
    if getattr(args, "file", None):
        try:
            return dsl.compile_file(args.file, params=bindings or None,
                                    rank=rank, generators=generators)
        except dsl.DslError as exc:
            raise ConfigError(f"{args.file}: {exc}") from exc
    name = getattr(args, "name", None)
    if not name:
        raise ConfigError("select an algebra with --name or --file")
    try:
        return catalog(name, lam=bindings.get("lambda"), rank=rank or 1,
                       generators=generators)
    except (AlgebraError, ScalarParseError) as exc:
        raise ConfigError(str(exc)) from exc


def _window_from_args(alg, args, margin_default=2) -> dv.Window:
    gbox = _parse_box(args.gbox, "degree")
    if len(gbox) == 1 and alg.group.rank > 1:
        gbox = gbox * alg.group.rank
    indexed = any(f.index_domain for f in alg.families)
    ibox = _parse_box(args.ibox, "index")[0] if indexed else None
    margin = args.margin if args.margin is not None else margin_default
    try:
        return dv.make_window(alg, gbox, ibox=ibox, margin=margin)
    except dv.WindowError as exc:
        raise ConfigError(str(exc)) from exc


def _delta_from_args(alg, args) -> Scalar:
    text = getattr(args, "delta", None) or "1/2"
    try:
        value = parse_scalar(text, alg.group.nvars)
    except ScalarParseError as exc:
        raise ConfigError(f"bad delta {text!r}: {exc}") from exc
    if value.is_zero():
        raise ConfigError("delta must be nonzero")
    return value


def _processes_from_args(args) -> int:
    if getattr(args, "processes", None):
        return max(1, args.processes)
    env = os.environ.get("HALFDERIV_PROCS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"bad HALFDERIV_PROCS value {env!r}") from None
    return 1


def _emit(args, report: dict, table_lines) -> None:
    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True)
    else:
        text = "\n".join(table_lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _envelope(command: str, config: dict, results, t0: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "halfderiv", "version": __version__},
        "command": command,
        "config": config,
        "results": results,
        "timestamp": {"unix": round(time.time(), 3),
                      "elapsed_ms": round(1000 * (time.time() - t0), 3)},
    }


def _algebra_config(alg: AlgebraSpec) -> dict:
    return alg.describe()


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def cmd_catalog(args) -> int:
    t0 = time.time()
    if args.name:
        alg = _algebra_from_args(args)
        results = {"algebra": _algebra_config(alg),
                   "trivial_half_derivations": delta_trivial(alg)}
        lines = [f"algebra {alg.name}"]
        for fam in alg.families:
            kind = "central" if fam.central else (
                f"graded, index in {'Z+' if fam.index_domain == 'nat' else 'Z'}"
                if fam.index_domain else "graded")
            lines.append(f"  {fam.name:8s} {kind}")
        for k, v in alg.describe()["params"].items():
            lines.append(f"  param {k} = {v}")
    else:
        entries = catalog_summary()
        results = {"algebras": entries}
        width = max(len(e["name"]) for e in entries)
        lines = [f"{e['name']:{width}s}  {e['families']}  (params: {e['params']})"
                 for e in entries]
    report = _envelope("catalog", {"name": args.name}, results, t0)
    _emit(args, report, lines)
    return 0


# ---------------------------------------------------------------------------
# jacobi
# ---------------------------------------------------------------------------

def cmd_jacobi(args) -> int:
    t0 = time.time()
    if args.samples <= 0:
        raise ConfigError("--samples must be positive")
    alg = _algebra_from_args(args)
    window = _window_from_args(alg, args, margin_default=0)
    symbols = dv.enumerate_window(alg, window)
    rng = random.Random(args.seed)
    coverage = {}
    witness = None
    for _ in range(args.samples):
        x, y, z = (rng.choice(symbols) for _ in range(3))
        key = "/".join(sorted((x.family, y.family, z.family)))
        coverage[key] = coverage.get(key, 0) + 1
        defect = alg.jacobi_defect(x, y, z)
        if not defect.is_zero() and witness is None:
            witness = {"triple": [str(x), str(y), str(z)], "defect": repr(defect)}
    results = {
        "samples": args.samples,
        "all_zero": witness is None,
        "witness": witness,
        "coverage": dict(sorted(coverage.items())),
    }
    config = {
        "algebra": _algebra_config(alg),
        "window": window.describe(),
        "prng": {"algorithm": "mt19937", "seed": args.seed},
    }
    lines = [f"jacobi audit: {args.samples} sampled triples on {alg.name}"]
    lines += [f"  {k}: {v}" for k, v in sorted(coverage.items())]
    lines.append("all defects exactly zero" if witness is None
                 else f"NONZERO DEFECT at {witness['triple']}: {witness['defect']}")
    report = _envelope("jacobi", config, results, t0)
    _emit(args, report, lines)
    return 0 if witness is None else 1


# ---------------------------------------------------------------------------
# derive
# ---------------------------------------------------------------------------

def _basis_triples(alg, vectors) -> list:
    out = []
    for vec in vectors:
        entry = [
            {"in": format_symbol(x, alg), "out": format_symbol(u, alg),
             "coeff": format_scalar(c)}
            for (x, u), c in sorted(vec.items(),
                                    key=lambda kv: (alg.symbol_sort_key(kv[0][0]),
                                                    alg.symbol_sort_key(kv[0][1])))
        ]
        out.append(entry)
    return out


def _degree_record(alg, degree, space) -> dict:
    rec = {
        "degree": format_element(degree) if degree is not None else "mixed",
        "solved": space.solved,
        "interior_rank": space.interior_rank,
        "full_rank": space.full_rank,
    }
    rec.update(space.stats)
    if space.solved:
        rec["interior_basis"] = _basis_triples(alg, dv.interior_basis(space))
    return rec


def _rank_grid(results: dict, rank: int):
    if rank == 1:
        degs = sorted(results)
        head = "degree   " + " ".join(f"{d[0]:>4d}" for d in degs)
        row = "interior " + " ".join(f"{results[d].interior_rank:>4d}" for d in degs)
        return [head, row]
    if rank == 2:
        xs = sorted({d[0] for d in results})
        ys = sorted({d[1] for d in results})
        lines = ["interior ranks (rows: first coordinate, cols: second)"]
        lines.append("      " + " ".join(f"{y:>3d}" for y in ys))
        for x in xs:
            cells = []
            for y in ys:
                space = results.get(GroupElement((x, y)))
                cells.append(f"{space.interior_rank:>3d}" if space else "  .")
            lines.append(f"{x:>5d} " + " ".join(cells))
        return lines
    return [f"degree {format_element(d)}: interior rank {s.interior_rank}"
            for d, s in sorted(results.items())]


def cmd_derive(args) -> int:
    t0 = time.time()
    alg = _algebra_from_args(args)
    delta = _delta_from_args(alg, args)
    degree = None
    sweep = True
    if args.degree and args.degree not in ("all", "sweep"):
        sweep = False
        degree = None if args.degree == "mixed" else \
            parse_element(args.degree, alg.group.rank)
    margin_default = 2
    if not sweep and degree is not None:
        margin_default = max(abs(c) for c in degree) + 2
    window = _window_from_args(alg, args, margin_default=margin_default)
    processes = _processes_from_args(args)

    config = {
        "algebra": _algebra_config(alg),
        "window": window.describe(),
        "delta": format_scalar(delta),
        "degree": args.degree or "all",
        "index_halo": args.halo,
        "processes": processes,
    }

    if sweep:
        results = dv.solve_all_degrees(alg, delta, window, processes=processes,
                                       index_halo=args.halo, keep_systems=False)
        records = [_degree_record(alg, d, s) for d, s in results.items()]
        lines = [f"half-derivation sweep on {alg.name}, delta = {format_scalar(delta)}"]
        lines += _rank_grid(results, alg.group.rank)
        nontrivial = {d: s for d, s in results.items() if s.interior_rank}
        lines.append(f"degrees solved: {sum(1 for s in results.values() if s.solved)}"
                     f" of {len(results)} reachable")
        for d, s in sorted(nontrivial.items()):
            lines.append(f"  degree {format_element(d)}: interior rank {s.interior_rank}")
        payload = {"degrees": records}
    else:
        space = dv.solve(dv.DerivationProblem(alg, delta, degree, window,
                                              index_halo=args.halo))
        rec = _degree_record(alg, degree, space)
        payload = {"degrees": [rec]}
        label = rec["degree"]
        lines = [
            f"half-derivation solve on {alg.name}, degree {label}, "
            f"delta = {format_scalar(delta)}",
            f"unknowns {rec.get('unknowns')}, equations {rec.get('equations')} "
            f"(pairs skipped {rec.get('pairs_skipped')}, "
            f"equations skipped {rec.get('equations_skipped')})",
            f"kernel dimension {rec['full_rank']}, interior rank {rec['interior_rank']}",
        ]
        for k, vec in enumerate(rec.get("interior_basis", [])):
            lines.append(f"  interior basis vector {k}:")
            for item in vec:
                lines.append(f"    {item['in']} -> {item['out']}   {item['coeff']}")

    report = _envelope("derive", config, payload, t0)
    _emit(args, report, lines)
    return 0


# ---------------------------------------------------------------------------
# tp
# ---------------------------------------------------------------------------

def cmd_tp(args) -> int:
    t0 = time.time()
    alg = _algebra_from_args(args)
    try:
        product, expect = tp.load_product(alg, args.product)
    except (tp.ProductError, AlgebraError, ScalarParseError, ValueError) as exc:
        raise ConfigError(f"{args.product}: {exc}") from exc
    window = _window_from_args(alg, args, margin_default=0)
    symbols = dv.enumerate_window(alg, window)
    reports = tp.run_tp_suite(alg, product, symbols)
    met, status = tp.expectations_met(reports, expect)

    trivial = delta_trivial(alg)
    interpretation = None
    if trivial:
        interpretation = (
            "every half-derivation of this algebra is a scalar multiple of the "
            "identity, so every transposed Poisson structure on it is trivial "
            "(the zero product)")

    results = {
        "product": product.describe(),
        "window_symbols": len(symbols),
        "laws": {k: (v.describe() if isinstance(v, tp.VerifyReport) else {
            "checked": v.checked, "passed": v.passed, "skipped": v.skipped,
            "failed": len(v.failures)}) for k, v in reports.items()},
        "expectations": {"requested": expect, "status": status, "met": met},
        "interpretation": interpretation,
    }
    config = {"algebra": _algebra_config(alg), "window": window.describe(),
              "product_file": args.product}
    lines = [f"transposed Poisson verification on {alg.name} "
             f"({len(symbols)} window symbols)"]
    for law, rep in reports.items():
        if isinstance(rep, tp.VerifyReport):
            state = "PASS" if rep.ok else f"FAIL ({rep.failed} witnesses)"
            lines.append(f"  {law:26s} {state}  [checked {rep.checked}, "
                         f"skipped {rep.skipped}]")
            if not rep.ok and rep.failures:
                w = rep.failures[0]
                lines.append(f"    witness: {', '.join(str(s) for s in w.witness)}")
                lines.append(f"      lhs = {w.lhs}")
                lines.append(f"      rhs = {w.rhs}")
        else:
            state = "PASS" if not rep.failures else "FAIL"
            lines.append(f"  {law:26s} {state}  [checked {rep.checked}]")
    lines.append(f"expectations {expect}: {'met' if met else 'NOT MET'} ({status})")
    if interpretation:
        lines.append(f"note: {interpretation}")
    report = _envelope("tp", config, results, t0)
    _emit(args, report, lines)
    return 0 if met else 1


# ---------------------------------------------------------------------------
# compile
# ---------------------------------------------------------------------------

def cmd_compile(args) -> int:
    t0 = time.time()
    bindings = _parse_bindings(args.bind)
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
        ast = dsl.parse(text)
        alg = dsl.compile_ast(ast, params=bindings or None, rank=args.rank,
                              generators=args.gens.split(",") if args.gens else None)
    except dsl.AntisymmetryViolation as exc:
        print(f"antisymmetry violation: {exc}", file=sys.stderr)
        return 1
    except dsl.DslError as exc:
        raise ConfigError(f"{args.file}: {exc}") from exc
    results = {
        "algebra": _algebra_config(alg),
        "clauses": len(ast.clauses),
        "canonical": dsl.pretty(ast),
    }
    lines = [f"compiled {args.file}: algebra {alg.name}, "
             f"{len(alg.families)} families, {len(ast.clauses)} bracket clauses"]
    lines += ["canonical form:"] + ["  " + l for l in dsl.pretty(ast).splitlines()]
    report = _envelope("compile", {"file": args.file, "bind": bindings}, results, t0)
    _emit(args, report, lines)
    return 0


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _add_algebra_options(sub, with_window=True):
    sub.add_argument("--name", choices=CATALOG_NAMES, help="catalog algebra")
    sub.add_argument("--file", help="a .liealg definition file")
    sub.add_argument("--lambda", dest="lam", help="deformation parameter for g")
    sub.add_argument("--bind", action="append", metavar="NAME=VALUE",
                     help="bind a declared parameter (repeatable)")
    sub.add_argument("--rank", type=int, help="grading group rank (default 1)")
    sub.add_argument("--gens", help="comma-separated generator values, first must be 1")
    if with_window:
        sub.add_argument("--gbox", default="-4..4",
                         help="degree box lo..hi[,lo..hi...] (default -4..4)")
        sub.add_argument("--ibox", default="-4..4",
                         help="index interval lo..hi for indexed families "
                              "(clamped at 0 for Z+ domains; default -4..4)")
        sub.add_argument("--margin", type=int, default=None,
                         help="interior margin (default 2, or |degree|+2 for "
                              "single-degree solves)")


def _add_output_options(sub):
    sub.add_argument("--format", choices=("table", "json"), default="table")
    sub.add_argument("--out", help="write the report to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfderiv",
        description="Exact half-derivation spaces and transposed Poisson "
                    "structures on graded Lie algebras.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("catalog", help="list built-in algebras")
    _add_algebra_options(p, with_window=False)
    _add_output_options(p)
    p.set_defaults(fn=cmd_catalog)

    p = subs.add_parser("jacobi", help="seeded Jacobi identity audit")
    _add_algebra_options(p)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    _add_output_options(p)
    p.set_defaults(fn=cmd_jacobi)

    p = subs.add_parser("derive", help="solve half-derivation systems")
    _add_algebra_options(p)
    p.add_argument("--delta", default="1/2", help="derivation weight (default 1/2)")
    p.add_argument("--degree", default="all",
                   help="'all' (sweep), 'mixed' (one unrestricted solve), or a "
                        "degree like 2 or (1,0)")
    p.add_argument("--halo", type=int, default=None,
                   help="index halo for unknown outputs (default: the largest "
                        "index offset in the bracket table)")
    p.add_argument("--processes", type=int, default=None,
                   help="parallel per-degree solves (default 1 or "
                        "$HALFDERIV_PROCS)")
    _add_output_options(p)
    p.set_defaults(fn=cmd_derive)

    p = subs.add_parser("tp", help="verify a transposed Poisson product file")
    _add_algebra_options(p)
    p.add_argument("--product", required=True, help="JSON product file")
    _add_output_options(p)
    p.set_defaults(fn=cmd_tp)

    p = subs.add_parser("compile", help="parse and check a .liealg file")
    p.add_argument("--file", required=True)
    p.add_argument("--bind", action="append", metavar="NAME=VALUE")
    p.add_argument("--rank", type=int)
    p.add_argument("--gens")
    _add_output_options(p)
    p.set_defaults(fn=cmd_compile)

    return parser


_DASH_VALUED = ("--gbox", "--ibox", "--degree", "--delta", "--lambda")


def _preparse(argv):
    """Glue values that begin with '-' (boxes, negative degrees) onto
    their option so argparse does not mistake them for flags."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _DASH_VALUED and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_preparse(list(argv)))
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except dsl.AntisymmetryViolation as exc:
        print(f"antisymmetry violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
