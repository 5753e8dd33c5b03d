"""Command line interface: run | study | check | stencil.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
usage.  Failures print one machine-readable JSON record to stderr.  All
file outputs use shortest round-trip float formatting and fixed row
order, so identical configs produce byte-identical artifacts.

The GPME_THREADS environment variable caps BLAS/OpenMP threading; it is
applied before any numeric module is imported and never changes results,
only speed.  Keep imports of the compute modules inside functions so the
cap can land first.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path


def _apply_thread_cap():
    threads = os.environ.get("GPME_THREADS")
    if not threads:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, threads)


def _emit_error(kind, exc):
    record = {"error": kind, "message": str(exc)}
    field = getattr(exc, "field", None)
    if field:
        record["field"] = field
    cell = getattr(exc, "cell", None)
    if cell is not None:
        record["cell"] = list(cell)
    print(json.dumps(record), file=sys.stderr)


def _float_str(x):
    return repr(float(x))


def _out_dir(args, cfg):
    out = args.out if getattr(args, "out", None) else cfg.get("output_dir")
    if out is None:
        out = "gpme_out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _exact_error(traj, exact, r):
    """sup over knots and midpoints of the L^r distance between the run's
    interpolant and the exact profile's cell averages."""
    import numpy as np

    from .grid_field import lr_norm_of_values

    knots = traj.time_grid.knots
    times = np.sort(np.concatenate([knots, 0.5 * (knots[:-1] + knots[1:])]))
    worst = 0.0
    for t in times:
        ref = exact.at_time(float(t)).cell_averages(traj.grid)
        vals = traj.values_at_time(float(t))
        worst = max(worst, lr_norm_of_values(vals - ref, traj.grid.cell_volume, r))
    return worst


def cmd_run(args):
    from .config import build_plan, load_config
    from .diagnostics import equitightness_check
    from .evolution import run
    from .grid_field import GridFunction, write_field_csv

    cfg = load_config(args.config)
    if args.dry_run:
        print(json.dumps(cfg, indent=2))
        return 0
    plan = build_plan(cfg)
    report = run(plan.problem, plan.grid, plan.time_grid, config=plan.solver)

    out = _out_dir(args, cfg)
    stride = plan.diagnostics["save_stride"]
    n_knots = len(report.trajectory.fields)
    saved = sorted(set(range(0, n_knots, stride)) | {n_knots - 1})
    for j in saved:
        write_field_csv(out / f"field_{j:05d}.csv",
                        GridFunction(plan.grid, report.trajectory.fields[j]))

    eq_reports = []
    stencil = plan.problem.operator.build_stencil(plan.grid)
    for R in plan.diagnostics["R_list"]:
        eq_reports.append(equitightness_check(
            report.trajectory, plan.problem, R=R, r=plan.diagnostics["r"],
            stencil=stencil))
    lines = ["R,lhs,rhs,pass"]
    for eq in eq_reports:
        flag = "true" if eq.passed else "false"
        lines.append(f"{_float_str(eq.R)},{_float_str(eq.lhs)},"
                     f"{_float_str(eq.rhs_total)},{flag}")
    (out / "equitightness.csv").write_text("\n".join(lines) + "\n")

    _write_json(out / "report.json", {
        "config": cfg,
        "run": report.to_json_dict(),
        "equitightness": [eq.to_json_dict() for eq in eq_reports],
        "saved_knots": [int(j) for j in saved],
    })

    gap = max(abs(float(g)) for g in report.identity_gap)
    print(f"steps {plan.time_grid.n_steps}, final mass {float(report.mass[-1])!r}, "
          f"max ledger gap {gap!r}")
    for eq in eq_reports:
        print(f"tail bound R={eq.R:g}: lhs {eq.lhs!r} <= rhs {eq.rhs_total!r} "
              f"-> {'pass' if eq.passed else 'FAIL'}")
    return 0


def cmd_study(args):
    from .config import build_plan, load_config
    from .diagnostics import ct_lr_distance
    from .evolution import run

    import numpy as np

    cfg = load_config(args.config)
    if args.levels is None or args.levels < 2:
        from .errors import ConfigurationError
        raise ConfigurationError("study needs --levels >= 2", field="levels")
    if args.dry_run:
        print(json.dumps(cfg, indent=2))
        return 0

    h0 = cfg["problem"]["h"]
    r = cfg["diagnostics"]["r"]
    rows = []
    trajs = []
    plans = []
    for level in range(args.levels):
        h = h0 / 2 ** level
        plan = build_plan(cfg, h=h)
        report = run(plan.problem, plan.grid, plan.time_grid, config=plan.solver)
        plans.append(plan)
        trajs.append(report.trajectory)
        print(f"level {level}: h {h!r}, steps {plan.time_grid.n_steps}")

    exact = plans[0].exact
    if exact is not None:
        for level, traj in enumerate(trajs):
            err = _exact_error(traj, exact, r)
            rows.append((level, h0 / 2 ** level, err))
    else:
        finest = trajs[-1]
        for level, traj in enumerate(trajs[:-1]):
            err = ct_lr_distance(traj, finest, r=r)
            rows.append((level, h0 / 2 ** level, err))

    hs = np.array([h for _, h, _ in rows])
    errs = np.array([e for _, _, e in rows])
    if np.all(errs > 0.0) and len(rows) >= 2:
        order = float(np.polyfit(np.log2(hs), np.log2(errs), 1)[0])
    else:
        order = None

    out = _out_dir(args, cfg)
    lines = ["level,h,error"]
    for level, h, err in rows:
        lines.append(f"{level},{_float_str(h)},{_float_str(err)}")
    (out / "study.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "study.json", {
        "config": cfg,
        "levels": [{"level": level, "h": h, "error": err} for level, h, err in rows],
        "order": order,
        "reference": "exact" if exact is not None else "finest",
    })
    for level, h, err in rows:
        print(f"level {level}: h {h!r} error {err!r}")
    print(f"fitted order {order!r}")
    return 0


def cmd_check(args):
    from .checks import run_suite

    results = run_suite(args.suite)
    for res in results:
        print(res.line())
    failed = [res for res in results if not res.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_stencil(args):
    from .config import build_measure, load_stencil_config
    from .elliptic_solver import combine_with_laplacian
    from .grid_field import UniformGrid
    from .levy_operators import (OperatorSpec, check_moments, write_stencil_csv)

    cfg = load_stencil_config(args.config)
    p = cfg["problem"]
    if args.dry_run:
        print(json.dumps(cfg, indent=2))
        return 0
    grid = UniformGrid.from_box(p["dim"], p["h"], p["box_half_extent"])
    operator = OperatorSpec(c=p["operator"]["c"],
                            measure=build_measure(p["operator"]["measure"]),
                            support_radius=p["operator"]["support_radius"])
    # dump the weights of the whole operator: the local part contributes
    # its 1/h^2 nearest-neighbor weights alongside the measure cells
    stencil = combine_with_laplacian(operator.build_stencil(grid), operator.c)

    mcfg = p["operator"]["measure"]
    if mcfg is None:
        report = check_moments(stencil, variant="A")
    elif mcfg.get("alpha") is not None:
        R_list = [R for R in cfg["diagnostics"]["R_list"] if R > 1.0] or [2.0, 4.0, 8.0]
        report = check_moments(stencil, variant="A_double_prime",
                               alpha=mcfg["alpha"], R_list=R_list)
    else:
        report = check_moments(stencil, variant="A_prime")

    out = _out_dir(args, cfg)
    write_stencil_csv(out / "stencil.csv", stencil)
    _write_json(out / "moments.json", {"config": cfg, "moments": report.to_json_dict()})
    print(f"{stencil.n_offsets} offsets, total weight {stencil.total_weight!r}, "
          f"far remainder {stencil.tail_mass_beyond_support!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gpme",
        description="Finite-difference schemes for generalized porous medium "
                    "equations with local and integro-differential diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one configuration and write artifacts")
    run_p.add_argument("--config", required=True,
                       help="JSON config path or preset name")
    run_p.add_argument("--out", help="output directory (default: config output_dir)")
    run_p.add_argument("--dry-run", action="store_true",
                       help="echo the validated config and exit")
    run_p.set_defaults(fn=cmd_run)

    study_p = sub.add_parser("study", help="refinement study across halved meshes")
    study_p.add_argument("--config", required=True)
    study_p.add_argument("--out", help="output directory")
    study_p.add_argument("--levels", type=int, required=True,
                         help="number of refinement levels (>= 2)")
    study_p.add_argument("--dry-run", action="store_true")
    study_p.set_defaults(fn=cmd_study)

    check_p = sub.add_parser("check", help="run a property suite")
    check_p.add_argument("suite",
                         help="moments | resolvent | evolution | equitightness | all")
    check_p.set_defaults(fn=cmd_check)

    st_p = sub.add_parser("stencil", help="dump stencil weights and moment sums")
    st_p.add_argument("--config", required=True)
    st_p.add_argument("--out", help="output directory")
    st_p.add_argument("--dry-run", action="store_true")
    st_p.set_defaults(fn=cmd_stencil)
    return parser


def main(argv=None):
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    from .errors import ConfigurationError, GpmeError
    try:
        return args.fn(args)
    except ConfigurationError as e:
        _emit_error("configuration", e)
        return 2
    except GpmeError as e:
        _emit_error("runtime", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
