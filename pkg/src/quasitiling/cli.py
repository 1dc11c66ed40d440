"""``quasitiling`` command line: params, tile, verify, density, render, selftest.

Exit codes: 0 ok, 1 verification failed, 2 input error (bad config, corrupt or
malformed dump, unsupported group), 3 inconclusive, 4 separation failure,
5 infeasible parameters.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .config import ConfigError, RunConfig, load_config
from .constructor import (
    ConstructionParams,
    construct_dynamical,
    disjointify,
    make_params,
    plan_shapes,
)
from .errors import CorruptTiling, InfeasibleParameters, MissingProvenance, SeparationFailure
from .folner import FolnerFamily
from .groups import FinSet, Z, box, get_group
from .rationals import as_rational, fmt_rational
from .render import UnsupportedGroup, render_svg
from .serialize import DumpError, dumps, read_dump
from .tiling import WindowedTiling, covering_on_window, is_disjoint
from .verify import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    CheckResult,
    VerificationReport,
    check_constructive_witness,
    check_equivariance,
    check_final_covering,
    check_flow,
    check_stage_density,
    verify_trace,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_SEPARATION, EXIT_INFEASIBLE = range(6)
_STATUS_EXIT = {PASS: EXIT_OK, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}


def _window(cfg: RunConfig) -> FinSet:
    if cfg.window_radius < 0:
        return FinSet(cfg.group)
    return box(cfg.group, cfg.window_radius)


def build_params(cfg: RunConfig, x=None) -> ConstructionParams:
    fam = FolnerFamily(cfg.group)
    plan = plan_shapes(fam, cfg.eps, cfg.n0, deltas=cfg.deltas)
    probe_r = cfg.probe_radius
    if probe_r is None:
        probe_r = max(cfg.window_radius, 0) + 2 * plan.indices[-1]
    x = cfg.point() if x is None else x
    return make_params(fam, cfg.eps, cfg.n0, [x], box(cfg.group, probe_r),
                       deltas=plan.deltas, max_cover_radius=cfg.max_cover_radius)


def tile_from_config(cfg: RunConfig):
    x = cfg.point()
    params = build_params(cfg, x)
    trace = construct_dynamical(x, params, _window(cfg))
    wt = disjointify(trace) if cfg.disjointify else trace.tiling()
    header = cfg.header()
    header.update({
        "r": params.r,
        "indices": list(params.indices),
        "shape_deltas": [fmt_rational(d) for d in params.deltas],
        "cover_radius": params.cover.radius,
        "cover_size": params.cover.m,
    })
    return trace, wt, header


def cmd_params(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        group, eps, n0, deltas = cfg.group, cfg.eps, cfg.n0, cfg.deltas
    else:
        group = get_group(args.group)
        eps = as_rational(args.eps)
        n0 = args.n0
        deltas = None if not args.deltas else [as_rational(d) for d in args.deltas.split(",")]
    plan = plan_shapes(FolnerFamily(group), eps, n0, deltas=deltas)
    report = {
        "group": group.tag,
        "eps": fmt_rational(plan.eps),
        "r": plan.r,
        "deltas": [fmt_rational(d) for d in plan.deltas],
        "indices": list(plan.indices),
        "defects": {f"{i},{j}": fmt_rational(d) for (i, j), d in sorted(plan.defects().items())},
    }
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=1))
    else:
        print(f"group   {report['group']}")
        print(f"eps     {report['eps']}")
        print(f"r       {report['r']}")
        print(f"deltas  {', '.join(report['deltas']) or '-'}")
        print(f"indices {', '.join(map(str, report['indices']))}")
        for key, d in report["defects"].items():
            i, j = key.split(",")
            print(f"  defect(F_n{i} | F_n{j}) = {d} < {report['deltas'][int(j) - 1]}")
    return EXIT_OK


def cmd_tile(args) -> int:
    cfg = load_config(args.config)
    trace, wt, header = tile_from_config(cfg)
    text = dumps(wt, header, trace.support)
    out = args.out or cfg.output_path("dump")
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    render = args.render or cfg.output_path("render")
    if render:
        with open(render, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_svg(wt))
    print(f"{len(wt.tiling)} tiles ({wt.kind}), window {len(wt.window)}", file=sys.stderr)
    return EXIT_OK


def _flow_sample(wt: WindowedTiling, limit: int) -> WindowedTiling:
    """The ``limit`` tiles whose centers are closest to the origin (sub-tilings stay eps-disjoint)."""
    T = wt.tiling
    keys = sorted(T.keys(), key=lambda kc: (max(abs(v) for v in kc[1]), kc[1]))
    return WindowedTiling(T.restrict(c for _, c in keys[:limit]), wt.window, wt.kind, wt.eps)


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    wt, _header = read_dump(args.dump)
    if wt.group is not cfg.group:
        raise ConfigError(f"dump is over {wt.group.tag}, config says {cfg.group.tag}")
    trace, fresh, header = tile_from_config(cfg)
    report = VerificationReport()
    checks = set(cfg.checks)
    if "recompute" in checks:
        same = dumps(fresh, header, trace.support) == dumps(wt, header, trace.support)
        report.add(CheckResult("recompute", PASS if same else FAIL,
                               counterexample=None if same else {"dump": args.dump},
                               detail="" if same else "dump differs from a fresh construction"))
    if "witness" in checks:
        report.add(check_constructive_witness(trace))
    if "flow" in checks and wt.eps is not None:
        report.add(check_flow(_flow_sample(wt, cfg.flow_max_tiles), wt.eps))
    if "disjoint" in checks and wt.kind == "disjoint":
        ok = is_disjoint(wt.tiling)
        report.add(CheckResult("disjoint", PASS if ok else FAIL,
                               counterexample=None if ok else {"dump": args.dump}))
    if "density" in checks:
        for j in range(1, trace.params.r + 1):
            report.add(check_stage_density(trace, j))
    if "covering" in checks and wt.eps is not None:
        report.add(check_final_covering(wt, trace.params.shapes[0], None, wt.eps,
                                        point=trace.point, params=trace.params))
    if "equivariance" in checks:
        rng = random.Random(cfg.seed or 0)
        pool = box(cfg.group, cfg.equivariance_radius).coords()
        W = box(cfg.group, cfg.equivariance_window)
        for _ in range(cfg.equivariance_samples):
            g = pool[rng.randrange(len(pool))]
            report.add(check_equivariance(trace.point, g, trace.params, W))
    doc = report.to_dict()
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    for r in report.results:
        print(f"{r.status:>12}  {r.name}  {json.dumps(r.to_dict()['metrics'], sort_keys=True)}")
    print(f"overall: {report.status}")
    return _STATUS_EXIT[report.status]


def cmd_density(args) -> int:
    wt, _ = read_dump(args.dump)
    F = box(wt.group, args.radius)
    det = wt.determined_elements()
    op = wt.group.op
    inside = FinSet(wt.group, [g for g in wt.window.coords() if all(op(f, g) in det for f in F.members)])
    if not inside:
        print("no fully determined translate of the test box")
        return EXIT_INCONCLUSIVE
    ratio = covering_on_window(wt.tiling, F, inside)
    print(f"min covering ratio over {len(inside)} translates of box({args.radius}): "
          f"{fmt_rational(ratio)} ({float(ratio):.6f})")
    return EXIT_OK


def cmd_render(args) -> int:
    wt, _ = read_dump(args.dump)
    svg = render_svg(wt)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_selftest(args) -> int:
    """A small end-to-end run in Z with coarse explicit deltas."""
    from .symbolic import ShiftPoint

    eps = Fraction(1, 2)
    x = ShiftPoint.from_seed(Z, "01", 11)
    params = make_params(FolnerFamily(Z), eps, 1, [x], box(Z, 120), deltas=[1, 1])
    trace = construct_dynamical(x, params, box(Z, 80))
    report = verify_trace(trace)
    trimmed = disjointify(trace)
    ok = is_disjoint(trimmed.tiling)
    report.add(CheckResult("disjoint", PASS if ok else FAIL,
                           counterexample=None if ok else {"tiles": len(trimmed.tiling)}))
    for g in (1, -2, 3):
        report.add(check_equivariance(x, (g,), params, box(Z, 20)))
    for r in report.results:
        print(f"{r.status:>12}  {r.name}")
    print(f"overall: {report.status}")
    return _STATUS_EXIT[report.status]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quasitiling", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", help="derive r, deltas and shape indices")
    sp.add_argument("--config")
    sp.add_argument("--group", default="Z")
    sp.add_argument("--eps", default="1/2")
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--deltas", help="comma-separated explicit deltas")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("tile", help="construct a tiling and write its dump")
    sp.add_argument("config")
    sp.add_argument("--out")
    sp.add_argument("--render")
    sp.set_defaults(func=cmd_tile)

    sp = sub.add_parser("verify", help="verify a dump against its config")
    sp.add_argument("dump")
    sp.add_argument("config")
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("density", help="windowed covering density of a dump")
    sp.add_argument("dump")
    sp.add_argument("--radius", type=int, default=2)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("render", help="SVG of a Z2 dump")
    sp.add_argument("dump")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("selftest", help="small built-in end-to-end run")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SeparationFailure as exc:
        print(f"separation failure: {exc}", file=sys.stderr)
        return EXIT_SEPARATION
    except InfeasibleParameters as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CorruptTiling as exc:
        print(f"corrupt tiling: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DumpError, ConfigError, MissingProvenance, UnsupportedGroup) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
