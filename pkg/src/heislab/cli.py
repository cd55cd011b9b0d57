"""heislab command line.

Exit codes: 0 success, 1 computational error, 2 usage error.
Floats are printed with 15 significant digits.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

from . import __version__
from .christ import ChristConfig, alpha_sweep, iterate, verify_trace
from .counting import (
    count_N1,
    count_N2,
    count_S,
    count_S_tilde,
    divisor_count,
    gauss_circle_check,
    growth_report,
    quadric_breakdown,
    quadric_count,
    r2k_count,
    random_set,
)
from .errors import BudgetExceededError, EmptyInputError, FalsifiedInvariantError
from .formats import FormatError, read_function, read_set, write_function
from .lattice import LatticePoint
from .norms import ExponentQuery, classify_exponents, lorentz_norm, lp_norm, weak_norm
from .operator import DYADIC, MODES, REACHABLE, Box, OperatorConfig, apply
from .sharpness import delta_example_scan, necessity_scan

MANIFEST_SCHEMA = "heislab-manifest-1"
COMPUTATIONAL_ERRORS = (
    ArithmeticError,
    BudgetExceededError,
    EmptyInputError,
    FalsifiedInvariantError,
    FormatError,
    ValueError,
    OSError,
)


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.15g}"


def _exponent(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _int_list(text: str) -> list[int]:
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _point(text: str) -> LatticePoint:
    coords = _int_list(text)
    if len(coords) < 3 or len(coords) % 2 == 0:
        raise UsageError(f"a lattice point needs 2k+1 comma separated integers, got {text!r}")
    return LatticePoint(tuple(coords[:-1]), coords[-1])


def _band(text: str) -> tuple[int, int]:
    lo, hi = _int_list(text)
    return lo, hi


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_apply(args) -> None:
    f = read_function(args.input)
    k = f.k if args.k is None else args.k
    if args.mode != "full" and args.j is None:
        raise UsageError("--j is required for dyadic modes")
    config = OperatorConfig(k, args.lam, args.mode, args.j, args.weighting)
    if args.box is not None:
        domain = Box.parse(args.box)
    elif args.reachable or config.is_dyadic:
        domain = REACHABLE
    else:
        raise UsageError("full mode needs --box R,T")
    out = apply(config, f, domain)
    if args.out:
        write_function(out, args.out, args.format)
    else:
        for p, v in out.items():
            print(" ".join(str(x) for x in (*p.n, p.t)), fmt(v))


def cmd_norm(args) -> None:
    f = read_function(args.input)
    if args.type == "lp":
        val = lp_norm(f, args.p)
    elif args.type == "weak":
        val = weak_norm(f, args.p)
    else:
        if args.q is None:
            raise UsageError("--type lorentz needs --q")
        val = lorentz_norm(f, args.p, args.q)
    print(fmt(val))


def cmd_classify(args) -> None:
    c = classify_exponents(ExponentQuery(args.k, args.lam, args.p, args.q))
    print(c.label)
    if args.verbose:
        print(f"deficit {fmt(c.deficit)}")
        for name, ok in c.conditions.items():
            print(f"{name} {ok}")


def cmd_christ(args) -> None:
    E = read_set(args.set)
    op = OperatorConfig(E.k, args.lam, DYADIC, args.j)
    alphas = alpha_sweep(E, op) if args.alpha_sweep else [args.alpha]
    traces = []
    print("alpha r E_size F_size pairing bound certified")
    for a in alphas:
        trace = iterate(E, ChristConfig(op, a, args.rmax))
        traces.append(trace)
        for lv in trace.levels:
            print(fmt(a), lv.r, len(lv.E), len(lv.F), fmt(lv.pairing), fmt(lv.bound), str(lv.certified).lower())
        if args.verify:
            checks = verify_trace(trace)
            print("verify", " ".join(f"{k}={str(v).lower()}" for k, v in checks.items()))
            if not all(checks.values()):
                raise FalsifiedInvariantError(f"trace verification failed for alpha={fmt(a)}: {checks}")
    if args.trace:
        payload = traces[0].to_json() if len(traces) == 1 else {"traces": [t.to_json() for t in traces]}
        Path(args.trace).write_text(json.dumps(payload, indent=1) + "\n")


def cmd_count(args) -> None:
    kind = args.kind
    need = {
        "divisor": ["n"],
        "r2k": ["l"],
        "gauss": ["L"],
        "quadric": ["c", "band"],
        "S": ["set", "j"],
        "Stilde": ["set", "j"],
        "N1": ["x", "set", "j"],
        "N2": ["x", "set", "eset", "j"],
    }[kind]
    missing = [f"--{n}" for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--kind {kind} needs {' '.join(missing)}")
    if kind == "divisor":
        print(divisor_count(args.n))
    elif kind == "r2k":
        print(r2k_count(args.l, args.k))
    elif kind == "gauss":
        g = gauss_circle_check(args.L, args.k)
        print(f"count {g.total}")
        print(f"main_term {fmt(g.main_term)}")
        print(f"error {fmt(g.error)}")
    elif kind == "quadric":
        band = _band(args.band)
        method = args.method or "divisor"
        if method not in ("brute", "divisor"):
            raise UsageError("quadric counts use --method brute|divisor")
        if args.breakdown:
            b = quadric_breakdown(args.c, band)
            print(f"count {b.count}")
            print(f"free_pairs {b.free_pairs}")
            print(f"zero_residual_pairs {b.zero_residual_pairs}")
        else:
            print(quadric_count(args.c, band, method))
    elif kind in ("S", "Stilde"):
        E = read_set(args.set)
        y = _point(args.y) if args.y else None
        if kind == "S":
            print(count_S(E, y, args.j))
        else:
            method = args.method or "lines"
            if method not in ("lines", "pairs"):
                raise UsageError("S~ counts use --method lines|pairs")
            print(count_S_tilde(E, y, args.j, method))
    else:
        x = _point(args.x)
        F = read_set(args.set)
        if kind == "N1":
            print(count_N1(x, F, args.j))
        else:
            print(count_N2(x, F, read_set(args.eset), args.j))


def cmd_growth(args) -> None:
    if args.jmin > args.jmax:
        raise UsageError("--jmin must not exceed --jmax")
    E = read_set(args.set) if args.set else random_set(args.set_size, args.box, args.seed)
    rep = growth_report(E, range(args.jmin, args.jmax + 1), args.epsilon, seed=args.seed, method=args.method)
    _emit(rep.to_csv(), args.csv)
    if args.json:
        Path(args.json).write_text(json.dumps(rep.to_json(), indent=1) + "\n")
    if args.csv:
        print(f"slope {fmt(rep.slope) if rep.slope_defined else 'undefined'}")


def cmd_sharpness(args) -> None:
    if args.experiment == "delta":
        if args.q is None:
            raise UsageError("--experiment delta needs --q")
        scan = delta_example_scan(args.k, args.lam, args.q, _int_list(args.R_list))
        text = "R,partial_sum\n" + "".join(f"{r},{fmt(s)}\n" for r, s in scan.rows)
        _emit(text, args.csv)
        print(f"verdict {scan.verdict}")
        return
    if args.p is None or args.q is None:
        raise UsageError("--experiment box needs --p and --q")
    scan = necessity_scan(args.k, args.lam, args.p, args.q, _int_list(args.tmax_list), args.epsilon, seed=args.seed)
    _emit(scan.to_csv(), args.csv)
    if args.json:
        Path(args.json).write_text(json.dumps(scan.to_json(), indent=1) + "\n")
    if args.csv:
        print(f"slope {fmt(scan.slope)}")
        print(f"classification {scan.classification}")
        print(f"consistent {str(scan.consistent).lower()}")


# ---------------------------------------------------------------------------
# manifests


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


INPUT_FLAGS = ("input", "set", "eset")
OUTPUT_FLAGS = ("out", "trace", "csv", "json")


def _manifest(args, argv: list[str]) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    inputs = {getattr(args, f): _sha256(getattr(args, f)) for f in INPUT_FLAGS if getattr(args, f, None)}
    outputs = {getattr(args, f): _sha256(getattr(args, f)) for f in OUTPUT_FLAGS
               if getattr(args, f, None) and Path(getattr(args, f)).exists()}
    return {
        "schema": MANIFEST_SCHEMA,
        "version": __version__,
        "subcommand": args.command,
        "argv": argv,
        "params": params,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": outputs,
    }


def _strip_manifest(argv: list[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--manifest":
            skip = True
            continue
        if a.startswith("--manifest="):
            continue
        out.append(a)
    return out


def cmd_replay(args) -> None:
    m = json.loads(Path(args.manifest_file).read_text())
    if m.get("schema") != MANIFEST_SCHEMA:
        raise ValueError(f"{args.manifest_file} is not a heislab manifest")
    for path, digest in m["inputs"].items():
        if _sha256(path) != digest:
            raise ValueError(f"input {path} changed since the manifest was written")
    code = run(m["argv"])
    if code != 0:
        raise ValueError(f"replayed command exited with {code}")
    bad = [p for p, d in m["outputs"].items() if _sha256(p) != d]
    if bad:
        raise FalsifiedInvariantError(f"replay differs from the manifest for {', '.join(bad)}")
    print(f"replay ok ({len(m['outputs'])} outputs identical)")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heislab", description="Exact experiments on the discrete Heisenberg lattice")
    p.add_argument("--version", action="version", version=f"heislab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        if name != "replay":
            sp.add_argument("--manifest", help="write an experiment manifest (JSON) here")
        return sp

    a = command("apply", cmd_apply, "apply T^lambda or a dyadic piece to a sparse function")
    a.add_argument("--input", required=True)
    a.add_argument("--lambda", dest="lam", type=float, required=True)
    a.add_argument("--k", type=int)
    a.add_argument("--mode", choices=MODES, default="full")
    a.add_argument("--j", type=int)
    g = a.add_mutually_exclusive_group()
    g.add_argument("--box", help="output box R,T")
    g.add_argument("--reachable", action="store_true")
    a.add_argument("--weighting", choices=("dyadic", "kernel"), default="dyadic")
    a.add_argument("--out")
    a.add_argument("--format", choices=("sfn", "json"))

    n = command("norm", cmd_norm, "Lebesgue, weak and Lorentz norms")
    n.add_argument("--input", required=True)
    n.add_argument("--type", choices=("lp", "weak", "lorentz"), default="lp")
    n.add_argument("--p", type=_exponent, required=True)
    n.add_argument("--q", type=_exponent)

    c = command("classify", cmd_classify, "classify an exponent pair")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--lambda", dest="lam", type=float, required=True)
    c.add_argument("--p", type=_exponent, required=True)
    c.add_argument("--q", type=_exponent, required=True)
    c.add_argument("--verbose", action="store_true")

    ch = command("christ", cmd_christ, "run the E_r / F_r refinement on a set")
    ch.add_argument("--set", required=True)
    g = ch.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", type=float)
    g.add_argument("--alpha-sweep", action="store_true")
    ch.add_argument("--lambda", dest="lam", type=float, required=True)
    ch.add_argument("--j", type=int, required=True)
    ch.add_argument("--rmax", type=int, default=4)
    ch.add_argument("--trace")
    ch.add_argument("--verify", action="store_true")

    co = command("count", cmd_count, "divisor, representation and Diophantine counts")
    co.add_argument("--kind", required=True, choices=("divisor", "r2k", "gauss", "quadric", "S", "Stilde", "N1", "N2"))
    co.add_argument("--n", type=int)
    co.add_argument("--l", type=int)
    co.add_argument("--L", type=int)
    co.add_argument("--k", type=int, default=1)
    co.add_argument("--c", type=int)
    co.add_argument("--band")
    co.add_argument("--breakdown", action="store_true")
    co.add_argument("--set")
    co.add_argument("--eset")
    co.add_argument("--y")
    co.add_argument("--x")
    co.add_argument("--j", type=int)
    co.add_argument("--method", choices=("brute", "divisor", "lines", "pairs"))

    gr = command("growth", cmd_growth, "S~ growth over shells for a random set")
    gr.add_argument("--jmin", type=int, default=3)
    gr.add_argument("--jmax", type=int, default=6)
    gr.add_argument("--set-size", type=int, default=100)
    gr.add_argument("--box", type=int, default=8, help="half width of the sampling box")
    gr.add_argument("--set", help="use this set instead of a random one")
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--epsilon", type=float, default=0.01)
    gr.add_argument("--method", choices=("lines", "pairs"), default="lines")
    gr.add_argument("--csv")
    gr.add_argument("--json")

    sh = command("sharpness", cmd_sharpness, "necessity experiments")
    sh.add_argument("--experiment", choices=("delta", "box"), required=True)
    sh.add_argument("--k", type=int, default=1)
    sh.add_argument("--lambda", dest="lam", type=float, required=True)
    sh.add_argument("--p", type=_exponent)
    sh.add_argument("--q", type=_exponent)
    sh.add_argument("--tmax-list", default="100,1000,10000")
    sh.add_argument("--R-list", dest="R_list", default="10,100,1000")
    sh.add_argument("--epsilon", type=float, default=0.05)
    sh.add_argument("--seed", type=int, default=0)
    sh.add_argument("--csv")
    sh.add_argument("--json")

    r = command("replay", cmd_replay, "re-run a manifest and compare output digests")
    r.add_argument("manifest_file")
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.func(args)
    except UsageError as e:
        print(f"heislab {args.command}: error: {e}", file=sys.stderr)
        return 2
    except COMPUTATIONAL_ERRORS as e:
        print(f"heislab {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if getattr(args, "manifest", None):
        Path(args.manifest).write_text(json.dumps(_manifest(args, _strip_manifest(argv)), indent=1) + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
