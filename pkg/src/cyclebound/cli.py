"""Command-line interface.

Subcommands mirror the library layers: ``bounds``/``canard`` print the
closed forms, ``simulate``/``cycle`` run the integrator, ``region4``
prints the recovery-branch constants, and ``sweep``/``proofcheck``/
``figures`` drive the verification harness.  The environment variable
CYCLEBOUND_RTOL overrides the default integration tolerance everywhere;
explicit ``--rtol`` flags win over it.

Exit codes: 0 on success and all checks passing, 2 on a bound violation,
3 on simulation non-convergence, 1 on usage or parameter errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .bounds import canard_estimates, cycle_bounds
from .harness import (
    DEFAULT_PANELS,
    SweepSpec,
    emit_figures,
    proof_spotchecks,
    run_sweep,
)
from .model import Params, State, h, params_from_json
from .region4 import Case, Region4Config, alpha_factors, handoff_cap_envelope, smax_lower_bound
from .simulator import (
    EventKind,
    SimConfig,
    cycle_extreme_report,
    integrate,
    transit_points,
)


def _add_params_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--a", type=float, help="half-saturation parameter a")
    sub.add_argument("--lambda", dest="lam", type=float, help="break-even prey density")
    sub.add_argument("--m", type=float, help="predator time-scale ratio")
    sub.add_argument(
        "--params",
        type=Path,
        help="JSON file with either {a, lambda, m} or {r, K, q, H, p, d}",
    )


def _params_from_args(args: argparse.Namespace) -> Params:
    if args.params is not None:
        return params_from_json(args.params.read_text())
    if args.a is None or args.lam is None or args.m is None:
        raise ValueError("give --a, --lambda and --m (or --params FILE)")
    return Params(a=args.a, lam=args.lam, m=args.m)


def _sim_config(args: argparse.Namespace) -> SimConfig:
    overrides = {}
    if getattr(args, "rtol", None) is not None:
        overrides["rtol"] = args.rtol
    return SimConfig.from_env(**overrides)


def _print_record(record: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(record, indent=2, sort_keys=True))
    else:
        for key, value in record.items():
            print(f"{key} = {value}")


def _cmd_bounds(args: argparse.Namespace) -> int:
    p = _params_from_args(args)
    b = cycle_bounds(p, s0=args.s0, force=args.force)
    _print_record(b.as_dict(), args.json)
    return 0


def _cmd_canard(args: argparse.Namespace) -> int:
    p = _params_from_args(args)
    _print_record(canard_estimates(p).as_dict(), as_json=True)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    p = _params_from_args(args)
    cfg = _sim_config(args)
    start = State(h(args.s0, p), args.s0)
    # count descending section crossings: one per loop, immune to the
    # re-crossing pairs that saddle passages can produce
    downs = [0]

    def stop(ev) -> bool:
        if ev.kind is EventKind.S_EQ_LAMBDA_DOWN:
            downs[0] += 1
        return downs[0] > args.tours

    traj = integrate(start, p, cfg, stop=stop)
    lines = ["tau,ln_x,ln_s,region"]
    for (tau, (u, v)), label in zip(
        zip(traj.taus, traj.points), traj.region_labels(p)
    ):
        lines.append(f"{tau:.17g},{u:.17g},{v:.17g},{label}")
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.write_text(text)
        print(f"wrote {len(traj.taus)} samples to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_cycle(args: argparse.Namespace) -> int:
    p = _params_from_args(args)
    cfg = _sim_config(args)
    report = cycle_extreme_report(p, cfg, force=True)
    record = report.as_dict()
    if not report.extremes.converged:
        print("warning: return map did not converge within budget", file=sys.stderr)
    _print_record(record, args.json)
    if not report.extremes.converged:
        return 3
    return 0 if (report.passed or not report.bounds.proven) else 2


def _cmd_region4(args: argparse.Namespace) -> int:
    case = Case(args.case)
    cfg = Region4Config.for_case(case)
    factors = alpha_factors(args.m, cfg)
    record = {
        "case": case.value,
        "m": args.m,
        "handoff_cap_envelope": handoff_cap_envelope(args.m, case),
        "smax_lower_bound": smax_lower_bound(factors.x_gamma, cfg.s_gamma, cfg.s_gamma, args.m),
        **factors.as_dict(),
    }
    _print_record(record, as_json=True)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec.from_json(json.loads(args.spec.read_text()))
    if args.jobs is not None:
        spec = SweepSpec(
            a_values=spec.a_values,
            lambda_values=spec.lambda_values,
            m_values=spec.m_values,
            s0=spec.s0,
            sim=spec.sim,
            jobs=args.jobs,
        )
    report = run_sweep(spec)
    report.to_csv(args.out)
    print(f"{args.out}: {report.summary()}")
    return report.exit_code


def _cmd_proofcheck(args: argparse.Namespace) -> int:
    report = proof_spotchecks(Case(args.case))
    for line in report.lines():
        print(line)
    return 0 if report.all_passed else 2


def _cmd_figures(args: argparse.Namespace) -> int:
    panels = None
    if args.panel:
        panels = []
        for spec in args.panel:
            a_str, lam_str = spec.split(",")
            panels.append((float(a_str), float(lam_str)))
    m_values = None
    if args.points is not None:
        import numpy as np

        m_values = np.geomspace(0.01, 5.0, args.points)
    paths = emit_figures(
        args.which, args.out, panels=panels, m_values=m_values, cfg=_sim_config(args)
    )
    for path in paths:
        print(path)
    return 0


def _cmd_transit(args: argparse.Namespace) -> int:
    p = _params_from_args(args)
    tp = transit_points(p, args.s0, _sim_config(args))
    _print_record(
        {"x1": tp.x1, "ln_s2": tp.ln_s2, "ln_x3": tp.ln_x3, "s4": tp.s4},
        as_json=True,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclebound",
        description="Closed-form limit-cycle bounds, simulation and verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="print the closed-form bound set")
    _add_params_args(p_bounds)
    p_bounds.add_argument("--s0", type=float, default=0.8)
    p_bounds.add_argument("--force", action="store_true",
                          help="evaluate outside the proven parameter box")
    p_bounds.add_argument("--json", action="store_true")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_canard = sub.add_parser("canard", help="print the small-m approximations")
    _add_params_args(p_canard)
    p_canard.set_defaults(func=_cmd_canard)

    p_sim = sub.add_parser("simulate", help="dump a trajectory as CSV")
    _add_params_args(p_sim)
    p_sim.add_argument("--s0", type=float, default=0.8, help="start prey level on x = h(s)")
    p_sim.add_argument("--tours", type=int, default=1, help="number of full loops")
    p_sim.add_argument("--rtol", type=float)
    p_sim.add_argument("--out", type=Path, help="output CSV (default: stdout)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cycle = sub.add_parser("cycle", help="locate the limit cycle and compare to bounds")
    _add_params_args(p_cycle)
    p_cycle.add_argument("--rtol", type=float)
    p_cycle.add_argument("--json", action="store_true")
    p_cycle.set_defaults(func=_cmd_cycle)

    p_r4 = sub.add_parser("region4", help="recovery-branch constants for one m")
    p_r4.add_argument("--case", choices=["A", "B"], required=True)
    p_r4.add_argument("--m", type=float, required=True)
    p_r4.set_defaults(func=_cmd_region4)

    p_sweep = sub.add_parser("sweep", help="verify bounds against simulation on a grid")
    p_sweep.add_argument("--spec", type=Path, required=True, help="sweep spec JSON")
    p_sweep.add_argument("--out", type=Path, required=True, help="report CSV path")
    p_sweep.add_argument("--jobs", type=int, help="worker processes (default from spec)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_proof = sub.add_parser("proofcheck", help="numerical spot-checks of the sign facts")
    p_proof.add_argument("--case", choices=["A", "B"], required=True)
    p_proof.set_defaults(func=_cmd_proofcheck)

    p_fig = sub.add_parser("figures", help="emit bound-vs-simulation curves as CSV")
    p_fig.add_argument("--which", choices=["fig2", "fig3", "fig4", "fig5", "all"],
                       required=True)
    p_fig.add_argument("--out", type=Path, required=True, help="output directory")
    p_fig.add_argument("--points", type=int, help="number of m values (default 50)")
    p_fig.add_argument("--rtol", type=float)
    p_fig.add_argument(
        "--panel",
        action="append",
        metavar="A,LAMBDA",
        help=f"restrict to given panels (default: {DEFAULT_PANELS})",
    )
    p_fig.set_defaults(func=_cmd_figures)

    p_transit = sub.add_parser("transit", help="one tour from (h(s0), s0): crossing values")
    _add_params_args(p_transit)
    p_transit.add_argument("--s0", type=float, default=0.8)
    p_transit.add_argument("--rtol", type=float)
    p_transit.set_defaults(func=_cmd_transit)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
