"""Command-line front end.

Every subcommand prints a JSON report (or writes it to ``--out``) and exits
with 0 = PASS, 1 = VIOLATION, 2 = INCONCLUSIVE, 3 = usage error.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from . import convexity, counterexample as cx, extension, koch, plane, thinness
from ._rational import frac_str
from .intervals import GapList, fat_cantor, ternary_cantor
from .report import INCONCLUSIVE, PASS, VIOLATION, Report, write_csv

USAGE_EXIT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


# ---------------------------------------------------------------------------
# named inputs


def _pos(t):
    return np.maximum(t, 0) if isinstance(t, np.ndarray) else max(t, 0)


FUNCTIONS = {
    "neg-xy": lambda x, y: -x * y,
    "sq": lambda x, y: x * x + y * y,
    "abs": lambda x, y: abs(x) + abs(y),
    "kink": lambda x, y: _pos(x + y - 1),
    "quad": lambda x, y: x * x + 3 * y * y - x * y + x,
    "saddle": lambda x, y: x * x - y * y,
}


def make_set(name: str, depth: int | None = None) -> plane.PlaneSetApprox:
    name = name.lower()
    if name in ("holey", "staircase", "holey-staircase"):
        return plane.holey_staircase(depth or 10)
    if name in ("dust", "cantor-dust"):
        return plane.cantor_dust(depth or 6)
    if name == "koch":
        return plane.koch_curve(min(depth or 6, plane.KOCH_MAX_DEPTH))
    if name == "square":
        return plane.rect_union([[0, 0, 1, 1]], name="square")
    raise UsageError(f"unknown set {name!r} (holey, dust, koch, square)")


def parse_gaps(spec: str) -> GapList:
    """``fat:<budget>:<depth>`` or ``file:<path>`` holding GapList JSON."""
    kind, _, rest = spec.partition(":")
    if kind == "fat":
        budget, _, depth = rest.partition(":")
        try:
            return fat_cantor(Fraction(budget), int(depth))[1]
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad gap spec {spec!r}: {exc}") from exc
    if kind == "file":
        import json
        with open(rest) as fh:
            return GapList.from_json(json.load(fh))
    raise UsageError(f"bad gap spec {spec!r}; expected fat:<budget>:<depth> or file:<path>")


def parse_floats(text: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(Fraction(t)) for t in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse numbers from {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _params(args) -> cx.CounterexampleParams:
    try:
        return cx.build_params(parse_gaps(args.gaps), args.betas)
    except (cx.TooFewGaps, cx.InfeasibleCap) as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_set_build(args) -> Report:
    rep = Report("set-build", PASS, inputs={"set": args.set, "depth": args.depth}, seed=args.seed)
    if args.set in ("cantor", "fat"):
        if args.set == "cantor":
            S = ternary_cantor(args.depth or 3)
            rep.metrics = {"intervals": len(S), "measure": S.measure()}
        else:
            S, gaps = fat_cantor(Fraction(args.gap_budget), args.depth or 5)
            rep.metrics = {"intervals": len(S), "measure": S.measure(), "gaps": len(gaps),
                           "eps_sum": gaps.eps_sum()}
        if args.csv:
            write_csv(args.csv, ["lo", "hi"], [(iv.lo, iv.hi) for iv in S])
        return rep
    S = make_set(args.set, args.depth)
    depth = S.default_depth
    if S.kind is plane.Kind.KOCH_CURVE:
        poly = plane.koch_polyline(depth)
        rep.metrics = {"vertices": len(poly), "haus_bound": S.haus_bound(depth),
                       "haus_bound_note": "engineering bound, not derived"}
        if args.csv:
            plane.write_polyline_csv(args.csv, poly)
    else:
        rep.metrics = {"rectangles": len(S.cover(depth)), "area": S.cover(depth).area(),
                       "haus_bound": S.haus_bound(depth)}
        if args.csv:
            plane.write_rects_csv(args.csv, S, depth)
    return rep


def cmd_thinness_scan(args) -> Report:
    S = make_set(args.set)
    v = parse_floats(args.v, 2)
    eps = parse_floats(args.eps)
    rep = thinness.directional_thinness_scan(S, v, args.n, eps, seed=args.seed,
                                             budget=args.budget or 64, max_depth=args.depth or 10)
    if args.csv:
        write_csv(args.csv, ["x0", "y0", "x1", "y1", "clearance", "depth"],
                  [(*w["x_prime"], *w["y_prime"], w["clearance"], w["depth"]) for w in rep.witnesses])
    return rep


def cmd_disconnect_scan(args) -> Report:
    S = make_set(args.set)
    rep = thinness.totally_disconnected_scan(S, parse_floats(args.v, 2), args.resolution,
                                             n_lines=args.n, depth=args.depth, seed=args.seed)
    if args.csv:
        write_csv(args.csv, ["depth", "longest_run"],
                  [(r["depth"], r["longest_run"]) for r in rep.metrics["runs"]])
    return rep


def cmd_line_count(args) -> Report:
    S = make_set(args.set)
    x0, y0, x1, y1 = parse_floats(args.line, 4)
    top = args.depth or S.default_depth
    trend = []
    for g in range(1, top + 1):
        c = thinness.line_intersection_count(((x0, y0), (x1, y1)), S, g)
        trend.append({"depth": g, "lower": c.lower, "upper": c.upper})
    last = trend[-1]
    verdict = PASS if last["lower"] == last["upper"] else INCONCLUSIVE
    if args.csv:
        write_csv(args.csv, ["depth", "lower", "upper"], [(t["depth"], t["lower"], t["upper"]) for t in trend])
    return Report("line-count", verdict, inputs={"set": S.name, "line": [x0, y0, x1, y1]},
                  metrics={"trend": trend, "lower": last["lower"], "upper": last["upper"]},
                  seed=args.seed, settings={"depth": top},
                  notes=["upper counts cover components; it is evidence, not a bound on the limit set"])


def cmd_cx_build(args) -> Report:
    P = _params(args)
    if args.csv:
        write_csv(args.csv, ["w", "eps", "beta"], [(w, e, b) for (w, e), b in zip(P.gaps, P.betas)])
    return Report("cx-build", PASS, inputs={"gaps": args.gaps, "betas": args.betas},
                  metrics={"n": P.n, "eps_sum": P.gaps.eps_sum(), "beta_sum": sum(P.betas, Fraction(0)),
                           "params": P.to_json()}, seed=args.seed)


def cmd_cx_eval(args) -> Report:
    P = _params(args)
    rows = []
    for text in args.point or ["0,0"]:
        x, y = (Fraction(t) for t in text.split(","))
        h = cx.hessian_at(P, (x, y))
        rows.append({"point": [frac_str(x), frac_str(y)], "value": cx.eval_f(P, (x, y)),
                     "hessian": ({"fxx": h.fxx, "fxy": h.fxy, "fyy": h.fyy}
                                 if isinstance(h, cx.Hessian2) else {"on_boundary": list(h.lines)})})
    if args.csv:
        x0, y0, vx, vy = parse_floats(args.slice or "-2,-2,1,1", 4)
        cx.write_slice_csv(args.csv, P, (x0, y0), (vx, vy), np.linspace(0, 4, 401))
    return Report("cx-eval", PASS, inputs={"gaps": args.gaps, "betas": args.betas},
                  metrics={"evaluations": rows}, seed=args.seed)


def cmd_cx_certify(args) -> Report:
    P = _params(args)
    rng = np.random.default_rng(args.seed)
    n = args.n
    hist: dict[str, int] = {}
    failures = []
    min_det = None
    done = 0
    while done < n:
        p = rng.uniform(-2, 2, 2)
        if cx.in_obstacle(P, p[0]) and cx.in_obstacle(P, p[1]):
            continue
        cert = cx.certify_local_convexity(P, p)
        done += 1
        hist[cert.case.value] = hist.get(cert.case.value, 0) + 1
        if cert.case is cx.Case.STRIPE:
            min_det = cert.det_bound if min_det is None else min(min_det, cert.det_bound)
        if args.check_samples and not cx.check_certificate(P, cert, args.check_samples, rng):
            failures.append(cert.to_json())
    verdict = VIOLATION if failures else (PASS if n else INCONCLUSIVE)
    return Report("cx-certify", verdict, inputs={"gaps": args.gaps, "betas": args.betas, "n": n},
                  witnesses=failures[:10],
                  metrics={"histogram": dict(sorted(hist.items())), "min_stripe_det_bound": min_det,
                           "failures": len(failures)},
                  seed=args.seed, settings={"check_samples": args.check_samples})


def cmd_cx_gap(args) -> Report:
    P = _params(args)
    g = cx.nonconvexity_gap(P)
    return Report("cx-gap", PASS if g.G < 0 else VIOLATION,
                  inputs={"gaps": args.gaps, "betas": args.betas},
                  witnesses=[{"p": ["-1/1", "-1/1"], "q": ["1/1", "1/1"], "midpoint_violation": g.midpoint_violation}],
                  metrics={"G": g.G, "G_float": float(g.G), "closed_form": g.closed_form,
                           "sum_delta": g.sum_delta, "equal": g.G == g.closed_form},
                  seed=args.seed)


def _function(name: str):
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise UsageError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}") from None


def cmd_sverak(args) -> Report:
    f = _function(args.fn)
    tol = args.tol or 1e-6
    xs = parse_floats(args.x) if args.x else tuple(np.linspace(-1, 1, args.n))
    probes, bad = [], []
    for x in xs:
        pr = convexity.sverak_probe(f, Fraction(x), L=args.depth or 20, m=args.m, tol=tol)
        probes.append({"x": pr.x, "passed": pr.passed, "min_window_sup": min(w.sup for w in pr.windows)})
        if not pr.passed:
            worst = min(pr.windows, key=lambda w: w.sup)
            bad.append({"x": pr.x, "level": worst.level, "sup": worst.sup, "t": worst.t_at_sup})
        if args.csv and x == xs[0]:
            write_csv(args.csv, ["t", "r"], pr.rows())
    verdict = VIOLATION if bad else (PASS if probes else INCONCLUSIVE)
    return Report("sverak", verdict, inputs={"fn": args.fn, "points": len(xs)}, witnesses=bad,
                  metrics={"probes": probes}, seed=args.seed,
                  settings={"L": args.depth or 20, "m": args.m, "tol": tol},
                  notes=["finite-window evidence for a liminf statement"])


def cmd_koch_bounds(args) -> Report:
    rows = []
    ok = True
    for k, L, two_k in koch.bounds_table(args.k):
        holds = L >= two_k
        ok &= holds
        rows.append({"k": k, "L": L, "2k": two_k, "holds": holds})
    if args.csv:
        koch.write_bounds_csv(args.csv, args.k)
    return Report("koch-bounds", PASS if ok else VIOLATION, inputs={"k": args.k},
                  metrics={"table": rows}, seed=args.seed)


def cmd_extend(args) -> Report:
    S = make_set(args.set)
    f = _function(args.fn)
    pf = extension.PartialFn(f, S, parse_floats(args.v, 2))
    rng = np.random.default_rng(args.seed)
    pts = sample_set_points(S, args.n, rng)
    rep = extension.extension_report(pf, pts, tol=args.tol or 1e-6, n_segments=args.segments,
                                     seed=args.seed)
    if args.csv:
        write_csv(args.csv, ["x", "y", "value"], [(*p, v) for p, v in zip(pts, rep.metrics["values"])])
    return rep


def sample_set_points(S: plane.PlaneSetApprox, n: int, rng) -> np.ndarray:
    """Points on the set: exact landmarks for the staircase, cover-box centres otherwise."""
    if S.kind is plane.Kind.HOLEY_STAIRCASE:
        digits = rng.integers(0, 2, (n, 30))
        c = (2 * digits * 3.0 ** -np.arange(1, 31)).sum(axis=1)
        h = (digits * 2.0 ** -np.arange(1, 31)).sum(axis=1)
        return np.column_stack([c, h])
    boxes = S.cover(S.default_depth)
    return boxes.center[rng.integers(0, len(boxes), n)]


def cmd_all_checks(args) -> Report:
    start = time.perf_counter()
    ns = argparse.Namespace
    base = dict(seed=args.seed, depth=None, tol=None, budget=None, csv=None)
    runs = [
        cmd_cx_gap(ns(**base, gaps="fat:1/12:5", betas="uniform")),
        cmd_cx_certify(ns(**base, gaps="fat:1/12:5", betas="uniform", n=500, check_samples=50)),
        cmd_koch_bounds(ns(**base, k=30)),
        cmd_thinness_scan(ns(**{**base, "depth": 10}, set="holey", v="1,0", n=10, eps="0.1,0.01")),
        cmd_thinness_scan(ns(**{**base, "depth": 10}, set="holey", v="0,1", n=10, eps="0.1,0.01")),
        cmd_sverak(ns(**base, fn="neg-xy", x=None, n=5, m=32)),
        cmd_sverak(ns(**base, fn="abs", x=None, n=5, m=32)),
    ]
    verdicts = [r.verdict for r in runs]
    verdict = VIOLATION if VIOLATION in verdicts else (INCONCLUSIVE if INCONCLUSIVE in verdicts else PASS)
    return Report("all-checks", verdict, metrics={"checks": [{"command": r.command, "verdict": r.verdict}
                                                             for r in runs]},
                  seed=args.seed, wall_time=time.perf_counter() - start)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--csv", default=None, help="write plot data here")

    parser = _Parser(prog="cremovable", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("set-build", cmd_set_build, "build a set and summarize its cover")
    p.add_argument("--set", required=True, choices=["cantor", "fat", "holey", "dust", "koch", "square"])
    p.add_argument("--gap-budget", default="1/12")

    p = add("thinness-scan", cmd_thinness_scan, "search transparent segments parallel to v")
    p.add_argument("--set", default="holey")
    p.add_argument("--v", default="1,0")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--eps", default="0.1,0.01")

    p = add("disconnect-scan", cmd_disconnect_scan, "longest runs of line traces parallel to v")
    p.add_argument("--set", default="holey")
    p.add_argument("--v", default="0,1")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--resolution", type=float, default=0.01)

    p = add("line-count", cmd_line_count, "bounds on the number of points on a line")
    p.add_argument("--set", default="holey")
    p.add_argument("--line", required=True, help="x0,y0,x1,y1")

    for name, fn, help_ in [("cx-build", cmd_cx_build, "build counterexample parameters"),
                            ("cx-eval", cmd_cx_eval, "evaluate the counterexample exactly"),
                            ("cx-certify", cmd_cx_certify, "issue local convexity certificates"),
                            ("cx-gap", cmd_cx_gap, "exact non-convexity gap")]:
        p = add(name, fn, help_)
        p.add_argument("--gaps", default="fat:1/12:5")
        p.add_argument("--betas", default="uniform", choices=["uniform", "proportional"])
        if name == "cx-eval":
            p.add_argument("--point", action="append", help="x,y (repeatable, rationals allowed)")
            p.add_argument("--slice", default=None, help="x0,y0,vx,vy for --csv")
        if name == "cx-certify":
            p.add_argument("--n", type=int, default=10000)
            p.add_argument("--check-samples", type=int, default=200)

    p = add("sverak", cmd_sverak, "diagonal second-difference probe")
    p.add_argument("--fn", default="neg-xy", choices=sorted(FUNCTIONS))
    p.add_argument("--x", default=None, help="comma-separated diagonal points")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--m", type=int, default=32)

    p = add("koch-bounds", cmd_koch_bounds, "exact divergent lower bounds")
    p.add_argument("--k", type=int, default=10)

    p = add("extend", cmd_extend, "extend a function across a set")
    p.add_argument("--set", default="holey")
    p.add_argument("--fn", default="sq", choices=sorted(FUNCTIONS))
    p.add_argument("--v", default="0,1")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--segments", type=int, default=100)

    add("all-checks", cmd_all_checks, "run a quick battery of checks")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    start = time.perf_counter()
    try:
        rep = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"cremovable: error: {exc}\n")
        return USAGE_EXIT
    except ValueError as exc:
        sys.stderr.write(f"cremovable: error: {exc}\n")
        return USAGE_EXIT
    rep.wall_time = rep.wall_time or time.perf_counter() - start
    if args.out:
        rep.write(args.out)
    else:
        sys.stdout.write(rep.to_json() + "\n")
    return rep.exit_code


def main() -> None:
    raise SystemExit(run())
