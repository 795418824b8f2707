"""Command-line interface.

    ckdv run --config <path>
    ckdv preset <name> [--out <dir>]
    ckdv converge --levels <n> [--h0 <real>]
    ckdv advise --h <real> --t-end <real> [--rule paper|cfl] [--safety <real>]
    ckdv presets

Exit status: 0 on success, 1 on config faults, 2 when a run blows up.
"""

from __future__ import annotations

import argparse
import math
import sys

from .analytic import IC_SOLITON, InitialCondition, SolitonParams
from .diagnostics import convergence_study
from .errors import CkdvError
from .model import make_hirota_satsuma
from .runner import RunReport, list_presets, load_config, run_experiment, run_preset
from .stepper import RULE_DISPERSIVE_CFL, RULE_PAPER_STRICT, advise_tau

_RULE_ALIASES = {"paper": RULE_PAPER_STRICT, "cfl": RULE_DISPERSIVE_CFL}


def _report_summary(report: RunReport) -> int:
    print(f"outcome: {report.outcome}")
    if report.blow_up_step is not None:
        print(f"blow-up at step {report.blow_up_step}")
    print(f"tau = {report.plan.tau:.6g} ({report.plan.rule}, safety {report.plan.safety:g})")
    print(f"{len(report.snapshots)} snapshots in {report.output_dir}")
    if report.trace.max_percent_error:
        worst = max(report.trace.max_percent_error[0])
        print(f"max percent error, mode 1: {worst:.4g}%")
    return 0 if report.outcome == "completed" else 2


def _cmd_run(args: argparse.Namespace) -> int:
    report = run_experiment(load_config(args.config))
    return _report_summary(report)


def _cmd_preset(args: argparse.Namespace) -> int:
    result = run_preset(args.name, args.out)
    if isinstance(result, RunReport):
        return _report_summary(result)
    for path in result:
        print(path)
    return 0


def _cmd_converge(args: argparse.Namespace) -> int:
    spec = make_hirota_satsuma()
    ic = InitialCondition(IC_SOLITON, soliton=SolitonParams(1.0, 0.0))
    report = convergence_study(spec, ic, args.t_end, args.h0, args.levels)
    print(f"{'h':>10} {'max_err':>12} {'l2_err':>12} {'order':>7}")
    for k, h in enumerate(report.h_values):
        order = f"{report.observed_orders[k - 1]:7.3f}" if k > 0 else "      -"
        print(f"{h:>10.5g} {report.errors[k]:>12.5g} {report.l2_errors[k]:>12.5g} {order}")
    return 0


def _cmd_advise(args: argparse.Namespace) -> int:
    rule = _RULE_ALIASES.get(args.rule, args.rule)
    plan = advise_tau(make_hirota_satsuma(), args.h, args.t_end, rule, args.safety)
    n_steps = max(1, math.ceil(args.t_end / plan.tau - 1e-12))
    print(f"rule = {plan.rule}")
    print(f"tau = {plan.tau:.6g}")
    print(f"steps to t_end = {n_steps}")
    return 0


def _cmd_presets(_: argparse.Namespace) -> int:
    for preset in list_presets():
        tags = [preset.kind]
        if preset.oracle:
            tags.append("percent-error trace")
        print(f"{preset.name:8s} [{', '.join(tags)}] {preset.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckdv", description="coupled KdV solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config file")
    p_run.add_argument("--config", required=True)
    p_run.set_defaults(func=_cmd_run)

    p_preset = sub.add_parser("preset", help="run a named preset")
    p_preset.add_argument("name")
    p_preset.add_argument("--out", default=None)
    p_preset.set_defaults(func=_cmd_preset)

    p_conv = sub.add_parser("converge", help="refinement study on the soliton run")
    p_conv.add_argument("--levels", type=int, default=3)
    p_conv.add_argument("--h0", type=float, default=0.2)
    p_conv.add_argument("--t-end", dest="t_end", type=float, default=0.5)
    p_conv.set_defaults(func=_cmd_converge)

    p_adv = sub.add_parser("advise", help="suggest a stable time step")
    p_adv.add_argument("--h", type=float, required=True)
    p_adv.add_argument("--t-end", dest="t_end", type=float, required=True)
    p_adv.add_argument("--rule", default="cfl", choices=["paper", "cfl"])
    p_adv.add_argument("--safety", type=float, default=0.25)
    p_adv.set_defaults(func=_cmd_advise)

    p_list = sub.add_parser("presets", help="list available presets")
    p_list.set_defaults(func=_cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CkdvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
