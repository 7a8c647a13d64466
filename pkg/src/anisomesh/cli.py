"""Command-line interface: adapt, study, estimate, validate, render."""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .driver import AdaptOptions, convergence_study, run_adaptation
from .estimates import element_error_estimates
from .norms import interp_error_lp
from .problems import get_problem, hessian_analytic_field
from .validation import (
    arbitration_suite,
    lemma_bounds_suite,
    maxnorm_suite,
    metric_algebra_suite,
)


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    p = float(text)
    if p <= 0:
        raise argparse.ArgumentTypeError("p must be positive or 'inf'")
    return p


def _add_run_args(sp):
    sp.add_argument("--problem", required=True,
                    choices=["circle", "zigzag", "layers", "quadratic"])
    sp.add_argument("--m", type=int, required=True, choices=[0, 1])
    sp.add_argument("--p", type=_parse_p, required=True)
    sp.add_argument("--variant", default="new",
                    choices=["new", "huang-russell"])
    sp.add_argument("--iters", type=int, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--hessian-source", default="analytic",
                    choices=["analytic", "recovered"])
    sp.add_argument("--initial-divisions", type=int, default=16)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)


def _options_from_args(args, n_target) -> AdaptOptions:
    return AdaptOptions(
        problem=args.problem,
        m=args.m,
        p=args.p,
        n_target=n_target,
        variant=args.variant,
        iterations=args.iters,
        alpha=args.alpha,
        hessian_source=args.hessian_source,
        initial_divisions=args.initial_divisions,
    )


def _options_doc(options: AdaptOptions) -> dict:
    doc = dataclasses.asdict(options)
    doc["p"] = "inf" if math.isinf(float(options.p)) else float(options.p)
    return doc


def _cmd_adapt(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    options = _options_from_args(args, args.target_nbt)
    report = run_adaptation(options)
    fileio.write_mesh(out / "mesh_final.tmsh", report.mesh)
    fileio.write_history_csv(out / "history.csv", report.records)
    problem = get_problem(options.problem, **options.problem_params)
    hess = hessian_analytic_field(problem, report.mesh)
    shade = element_error_estimates(report.mesh, hess, options.m, options.p)
    fileio.render_svg(report.mesh, out / "mesh_final.svg", shade=shade)
    fileio.write_manifest(
        out / "manifest.json", "adapt", _options_doc(options), seed=args.seed,
        outputs=["mesh_final.tmsh", "history.csv", "mesh_final.svg"],
    )
    final = report.final
    print(f"final nbt={final.nbt} error_lp={final.error_lp:.6g} "
          f"grad_error_lp={final.grad_error_lp:.6g}")
    return 0


def _cmd_study(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    targets = [int(t) for t in args.targets.split(",")]
    options = _options_from_args(args, targets[0])
    result = convergence_study(options, targets)
    for n, rep in zip(targets, result.reports):
        fileio.write_history_csv(out / f"history_n{n}.csv", rep.records)
    fileio.write_slopes_csv(
        out / "slopes.csv",
        [(options.p, options.m, options.variant, result.slope,
          result.intercept, result.residual)],
    )
    fileio.write_manifest(
        out / "manifest.json", "study",
        {**_options_doc(options), "targets": targets}, seed=args.seed,
        outputs=["slopes.csv"] + [f"history_n{n}.csv" for n in targets],
    )
    print(f"slope={result.slope:.4f} intercept={result.intercept:.4f} "
          f"residual={result.residual:.4f}")
    return 0


def _cmd_estimate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = fileio.read_mesh(args.mesh)
    problem = get_problem(args.problem)
    hess = hessian_analytic_field(problem, mesh)
    est = element_error_estimates(mesh, hess, args.m, args.p)
    oracle = interp_error_lp(mesh, problem, args.p)
    lines = ["element,estimate,oracle,ratio"]
    per = oracle.per_element
    if not math.isinf(args.p):
        # The model estimates ||e||^2_Lp(K); compare on the ^p scale.
        per = per ** (2.0 / args.p)
    for i, (a, b) in enumerate(zip(est, per)):
        ratio = a / b if b > 0 else math.inf
        lines.append(f"{i},{a:.12g},{b:.12g},{ratio:.6g}")
    (out / "estimate.csv").write_text("\n".join(lines) + "\n")
    fileio.write_manifest(
        out / "manifest.json", "estimate",
        {"mesh": str(args.mesh), "problem": args.problem, "m": args.m,
         "p": "inf" if math.isinf(args.p) else args.p},
        seed=args.seed, outputs=["estimate.csv"],
    )
    print(f"wrote {out / 'estimate.csv'} ({len(est)} elements)")
    return 0


def _cmd_validate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    arb = arbitration_suite(n_cases=args.cases, seed=args.seed)
    rows.append(("formula_arbitration_l2", arb["cases"], arb["max_rel_l2"],
                 arb["max_rel_l2"] < 1e-9))
    rows.append(("formula_arbitration_h1", arb["cases"], arb["max_rel_h1"],
                 arb["max_rel_h1"] < 1e-9))
    mx = maxnorm_suite(n_cases=max(50, args.cases // 2), seed=args.seed)
    rows.append(("maxnorm_closed_form", mx["cases"], mx["max_rel"],
                 mx["max_rel"] < 1e-9 and mx["all_applicable"]
                 and mx["right_triangles_flagged"]))
    lem = lemma_bounds_suite(n_quadratics=max(20, args.cases // 5),
                             seed=args.seed)
    rows.append(("lemma_bounds", lem["checks"], float(lem["violations"]),
                 lem["violations"] == 0))
    alg = metric_algebra_suite(n_cases=args.cases, seed=args.seed)
    worst = max(alg["rotation"], alg["scaling"], alg["variant_m0"])
    rows.append(("metric_algebra", alg["cases"], worst,
                 worst < 1e-10 and alg["spd_closed"] and alg["p_inf"] < 1e-4))
    lines = ["suite,cases,worst,pass"]
    ok = True
    for name, cases, val, passed in rows:
        ok &= passed
        lines.append(f"{name},{cases},{val:.3g},{int(passed)}")
        print(f"{name}: {'PASS' if passed else 'FAIL'} (worst {val:.3g})")
    (out / "validate.csv").write_text("\n".join(lines) + "\n")
    fileio.write_manifest(out / "manifest.json", "validate",
                          {"cases": args.cases}, seed=args.seed,
                          outputs=["validate.csv"])
    return 0 if ok else 1


def _cmd_render(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = fileio.read_mesh(args.mesh)
    name = Path(args.mesh).stem + ".svg"
    fileio.render_svg(mesh, out / name)
    fileio.write_manifest(out / "manifest.json", "render",
                          {"mesh": str(args.mesh)}, seed=0, outputs=[name])
    print(f"wrote {out / name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="anisomesh",
        description="Anisotropic mesh adaptation from interpolation-error "
                    "metric tensors",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("adapt", help="run one adaptation loop")
    _add_run_args(sp)
    sp.add_argument("--target-nbt", type=int, required=True)
    sp.set_defaults(func=_cmd_adapt)

    sp = sub.add_parser("study", help="convergence study over target counts")
    _add_run_args(sp)
    sp.add_argument("--targets", required=True,
                    help="comma-separated increasing element counts")
    sp.set_defaults(func=_cmd_study)

    sp = sub.add_parser("estimate",
                        help="per-element estimate vs oracle on a mesh")
    sp.add_argument("--mesh", required=True)
    sp.add_argument("--problem", required=True,
                    choices=["circle", "zigzag", "layers", "quadratic"])
    sp.add_argument("--m", type=int, default=0, choices=[0, 1])
    sp.add_argument("--p", type=_parse_p, default=2.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser("validate",
                        help="formula-arbitration and lemma-bound suites")
    sp.add_argument("--cases", type=int, default=300)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_validate)

    sp = sub.add_parser("render", help="render a mesh file to SVG")
    sp.add_argument("--mesh", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures exit 1 with a diagnostic
        print(f"anisomesh: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
