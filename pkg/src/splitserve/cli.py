"""Command-line entry point.

Subcommands mirror the offline/online pipeline: ``feasible`` filters
configurations by SLO, ``plan`` picks the cheapest feasible setup,
``sweep`` tabulates costs over a grid and reports indifference points,
``replay`` runs deterministic trace replays and compares pools.

Exit codes: 0 success, 1 bad input, 2 no feasible configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .configurator import (
    CandidateEvaluation,
    DeploymentPlan,
    SweepAxis,
    SweepContext,
    SweepResult,
    candidate_cost,
    evaluate_candidates,
    load_plan,
    select_plan,
    slo_feasible,
    sweep,
)
from .costmodel import Setup
from .errors import InfeasibleError, SplitServeError
from .ioutils import atomic_write_text
from .pricing import PricingCatalog, default_catalog, load_catalog
from .profiles import (
    ExitDistribution,
    StagedModelProfile,
    load_distribution_family,
    load_profile,
)
from .simengine import SimParams, TrafficTrace, compare_pools, load_trace, replay

MONEY = "{:.6f}"


@dataclass
class RunManifest:
    """Parsed inputs for one command; everything is validated before any
    computation starts."""

    profile: StagedModelProfile
    pricing: PricingCatalog
    dists: dict[float, ExitDistribution] | None
    trace: TrafficTrace | None
    plans: list[DeploymentPlan]
    out_dir: Path
    args: argparse.Namespace

    @property
    def dist(self) -> ExitDistribution:
        if not self.dists:
            raise SplitServeError("this command needs --dist")
        if len(self.dists) > 1:
            raise SplitServeError(
                "this command needs a single distribution, got a family; "
                "pick one conf_thres"
            )
        return next(iter(self.dists.values()))

    def sim_params(self) -> SimParams:
        a = self.args
        return SimParams(
            scale_interval_epochs=a.scale_interval,
            cold_start_epochs=a.cold_start,
            w_mu=a.w_mu,
            w_sigma=a.w_sigma,
            phi=a.phi,
            t_cip=a.t_cip,
            r_max=a.r_max,
            seed=a.seed,
            exit_mode=a.exit_mode,
            transmission_seconds=a.transmission,
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="splitserve",
        description="Cost configurator and trace-replay simulator for "
        "multi-stage inference split across VM and serverless pools.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, trace: bool = False):
        p.add_argument("--profile", required=True, help="staged model profile JSON")
        p.add_argument("--pricing", help="pricing catalog JSON (default: built-in catalog)")
        p.add_argument("--dist", help="exit distribution JSON (single object or family list)")
        if trace:
            p.add_argument("--trace", help="traffic trace CSV with header epoch,requests")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--r-max", type=int, default=100, help="requests per epoch per instance")
        p.add_argument("--slo", type=float, default=6.0, help="latency objective, seconds")
        p.add_argument("--t-cip", type=float, default=None,
                       help="override the traffic cost-indifference point, requests/epoch")
        p.add_argument("--scale-interval", type=int, default=25, help="epochs between scale events")
        p.add_argument("--cold-start", type=int, default=19, help="VM boot time, epochs")
        p.add_argument("--w-mu", type=float, default=0.5, help="EWMA mean weight")
        p.add_argument("--w-sigma", type=float, default=0.5, help="EWMA deviation weight")
        p.add_argument("--phi", type=float, default=1.0, help="balancer threshold multiplier")
        p.add_argument("--seed", type=int, default=0, help="random seed for stochastic modes")
        p.add_argument("--transmission", type=float, default=0.0,
                       help="per-offload hand-off seconds billed serverless-side")
        p.add_argument("--exit-mode", choices=("expected", "rounded", "multinomial"),
                       default="expected", help="how batch exits are booked")
        p.add_argument("--plot-data", action="store_true",
                       help="also emit tidy CSV files for plotting")

    p_feasible = sub.add_parser("feasible", help="list SLO-feasible configurations")
    common(p_feasible)

    p_plan = sub.add_parser("plan", help="select the cheapest feasible setup and write the plan")
    common(p_plan, trace=True)
    p_plan.add_argument("--n-avg", type=float, default=None,
                        help="long-term average requests/epoch "
                        "(default: trace mean if --trace is given, else r_max)")

    p_sweep = sub.add_parser("sweep", help="tabulate setup costs over a grid")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=[a.value for a in SweepAxis])
    p_sweep.add_argument("--grid", help="comma-separated values, or start:stop:count")
    p_sweep.add_argument("--theta-i", help="VM config id for the VM-only setup")
    p_sweep.add_argument("--hybrid-theta-i", help="VM config id for the hybrid setup")
    p_sweep.add_argument("--theta-f", help="serverless config id")
    p_sweep.add_argument("--cut", type=int, default=None,
                         help="hybrid cut (default: deepest SLO-feasible)")
    p_sweep.add_argument("--n-avg", type=float, default=None,
                         help="requests/epoch held fixed (default: r_max)")

    p_replay = sub.add_parser("replay", help="replay a trace under one or more plans")
    common(p_replay, trace=True)
    p_replay.add_argument("--plan", action="append", required=True, dest="plan_files",
                          help="plan JSON (repeat to compare pools)")
    p_replay.add_argument("--epochs", type=int, default=None,
                          help="replay only the first N trace epochs")
    return parser


def build_manifest(args: argparse.Namespace) -> RunManifest:
    profile = load_profile(args.profile)
    pricing = load_catalog(args.pricing) if args.pricing else default_catalog()
    dists = load_distribution_family(args.dist) if args.dist else None
    trace = None
    if getattr(args, "trace", None):
        trace = load_trace(args.trace, epoch_seconds=args.slo)
    plans = [load_plan(p) for p in getattr(args, "plan_files", None) or []]
    out_dir = Path(args.out)
    return RunManifest(profile, pricing, dists, trace, plans, out_dir, args)


def cmd_feasible(manifest: RunManifest) -> int:
    args = manifest.args
    evaluations = evaluate_candidates(
        manifest.profile, manifest.pricing, args.r_max, args.slo,
        transmission_seconds=args.transmission,
    )
    _print_feasibility_table(evaluations, args.slo)
    if not any(e.feasible for e in evaluations):
        print("No configuration meets SLO.", file=sys.stderr)
        return 2
    return 0


def _print_feasibility_table(evaluations: list[CandidateEvaluation], slo: float) -> None:
    print(f"{'setup':<10} {'theta_i':<14} {'theta_f':<20} {'cut':>4} {'worst_s':>9}  feasible")
    for e in evaluations:
        o = e.option
        print(
            f"{o.setup.value:<10} {o.theta_i or '-':<14} {o.theta_f or '-':<20} "
            f"{o.cut_id if o.cut_id is not None else '-':>4} "
            f"{e.worst_case_seconds:>9.3f}  {'yes' if e.feasible else 'NO'}"
        )
    print(f"(SLO = {slo} s)")


def cmd_plan(manifest: RunManifest) -> int:
    args = manifest.args
    n = args.n_avg
    if n is None:
        n = (
            sum(manifest.trace.epochs) / len(manifest.trace.epochs)
            if manifest.trace is not None
            else float(args.r_max)
        )
    feasible = slo_feasible(
        manifest.profile, manifest.pricing, args.r_max, args.slo,
        transmission_seconds=args.transmission,
    )
    plan = select_plan(
        manifest.profile, manifest.dist, feasible, manifest.pricing,
        n, args.r_max, args.slo, transmission_seconds=args.transmission,
    )
    if args.t_cip is not None:
        plan = DeploymentPlan(
            setup=plan.setup, theta_i=plan.theta_i, theta_f=plan.theta_f,
            cut_id=plan.cut_id, t_cip=args.t_cip, r_max=plan.r_max,
        )
    print(f"costs at n = {n:g} requests/epoch ({manifest.pricing.currency}/epoch):")
    by_setup: dict[Setup, float] = {}
    for option in sorted(feasible, key=lambda o: o.setup.value):
        breakdown, _ = candidate_cost(
            option, manifest.profile, manifest.dist, manifest.pricing,
            n, args.r_max, args.slo, args.transmission,
        )
        if option.setup not in by_setup or breakdown.total < by_setup[option.setup]:
            by_setup[option.setup] = breakdown.total
    for setup in (Setup.IAAS_ONLY, Setup.FAAS_ONLY, Setup.HYBRID):
        cost = MONEY.format(by_setup[setup]) if setup in by_setup else "infeasible"
        print(f"  {setup.value:<10} {cost}")
    print(f"selected: {plan.setup.value} (pool {'+'.join(plan.pool)}, "
          f"t_cip={plan.t_cip:g} req/epoch)")
    out = manifest.out_dir / "plan.json"
    atomic_write_text(out, json.dumps(plan.to_dict(), indent=2) + "\n")
    print(f"wrote {out}")
    return 0


def _parse_grid(spec: str | None, axis: SweepAxis, manifest: RunManifest) -> list[float]:
    if spec is None:
        if axis is SweepAxis.CONF_THRES and manifest.dists:
            return sorted(manifest.dists)
        raise SplitServeError("--grid is required for this axis")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise SplitServeError(f"grid range must be start:stop:count, got {spec!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise SplitServeError("grid count must be >= 1")
        if count == 1:
            return [start]
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)]
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise SplitServeError(f"bad grid {spec!r}: {exc}") from exc


def _sweep_context(manifest: RunManifest) -> SweepContext:
    args = manifest.args
    vms = manifest.pricing.vms()
    serverless = manifest.pricing.serverless()
    if not vms or not serverless:
        raise SplitServeError("sweep needs at least one VM and one serverless config")
    theta_i = manifest.pricing[args.theta_i] if args.theta_i else max(vms, key=lambda c: c.unit_price)
    hybrid_vm = (
        manifest.pricing[args.hybrid_theta_i]
        if args.hybrid_theta_i
        else min(vms, key=lambda c: c.unit_price)
    )
    theta_f = manifest.pricing[args.theta_f] if args.theta_f else serverless[0]
    cut = args.cut
    if cut is None:
        feasible_cuts = [
            o.cut_id
            for o in slo_feasible(
                manifest.profile, manifest.pricing, args.r_max, args.slo,
                transmission_seconds=args.transmission,
            )
            if o.setup is Setup.HYBRID and o.theta_i == hybrid_vm.id and o.theta_f == theta_f.id
        ]
        if not feasible_cuts:
            raise InfeasibleError()
        cut = max(feasible_cuts)
    n = args.n_avg if args.n_avg is not None else float(args.r_max)
    t_cip = args.t_cip if args.t_cip is not None else 0.0
    dist = None
    family = None
    if manifest.dists:
        if len(manifest.dists) == 1:
            dist = next(iter(manifest.dists.values()))
        family = manifest.dists
    return SweepContext(
        profile=manifest.profile,
        theta_f=theta_f,
        theta_i=theta_i,
        hybrid_theta_i=hybrid_vm,
        cut_id=cut,
        n=n,
        r_max=args.r_max,
        slo=args.slo,
        t_cip_iaas=t_cip,
        t_cip_hybrid=t_cip,
        transmission_seconds=args.transmission,
        dist=dist,
        dist_family=family,
    )


def sweep_csv(result: SweepResult) -> str:
    lines = ["x,C_I,C_F,C_H"]
    for p in result.points:
        lines.append(
            f"{p.x!r},{p.costs[Setup.IAAS_ONLY].total!r},"
            f"{p.costs[Setup.FAAS_ONLY].total!r},{p.costs[Setup.HYBRID].total!r}"
        )
    for c in result.crossings:
        lines.append(f"# crossing,{c.pair[0].value}={c.pair[1].value},{c.x!r}")
    return "\n".join(lines) + "\n"


def sweep_tidy_csv(result: SweepResult) -> str:
    lines = ["x,setup,vm_cost,faas_cost,total"]
    for p in result.points:
        for setup in (Setup.IAAS_ONLY, Setup.FAAS_ONLY, Setup.HYBRID):
            b = p.costs[setup]
            lines.append(f"{p.x!r},{setup.value},{b.vm_cost!r},{b.faas_cost!r},{b.total!r}")
    return "\n".join(lines) + "\n"


def cmd_sweep(manifest: RunManifest) -> int:
    args = manifest.args
    axis = SweepAxis(args.axis)
    grid = _parse_grid(args.grid, axis, manifest)
    context = _sweep_context(manifest)
    result = sweep(axis, grid, context)
    out = manifest.out_dir / f"sweep_{axis.value}.csv"
    atomic_write_text(out, sweep_csv(result))
    print(f"wrote {out} ({len(result.points)} points)")
    if result.crossings:
        for c in result.crossings:
            print(f"crossing {c.pair[0].value} = {c.pair[1].value} at {axis.value} = {c.x:g}")
    else:
        print("no crossings on this grid")
    if args.plot_data:
        tidy = manifest.out_dir / f"sweep_{axis.value}_tidy.csv"
        atomic_write_text(tidy, sweep_tidy_csv(result))
        print(f"wrote {tidy}")
    return 0


def cmd_replay(manifest: RunManifest) -> int:
    args = manifest.args
    if manifest.trace is None:
        raise SplitServeError("replay needs --trace")
    trace = manifest.trace
    if args.epochs is not None:
        trace = trace.truncate(args.epochs)
    params = manifest.sim_params()
    reports = []
    for i, plan in enumerate(manifest.plans):
        report = replay(trace, plan, manifest.profile, manifest.dist, manifest.pricing, params)
        label = f"{i}:{'+'.join(plan.pool)}"
        stem = manifest.out_dir / f"report_{i}_{'_'.join(plan.pool)}"
        atomic_write_text(stem.with_suffix(".json"), report.to_json() + "\n")
        atomic_write_text(stem.with_suffix(".csv"), report.to_csv())
        reports.append((label, plan, report))
        print(
            f"{label:<16} total {MONEY.format(report.total_cost)} "
            f"(vm {MONEY.format(report.totals['vm_cost'])}, "
            f"faas {MONEY.format(report.totals['faas_cost'])}, "
            f"violations {report.totals['violations']}) -> {stem}.json/.csv"
        )
    if len(manifest.plans) >= 2:
        comparison = compare_pools(
            trace, manifest.plans, manifest.profile, manifest.dist, manifest.pricing, params
        )
        print("\nranking (cheapest first):")
        for entry in comparison.entries:
            print(
                f"  {entry.label:<16} {MONEY.format(entry.total_cost)}  "
                f"+{entry.pct_over_best:.1f}% vs best"
            )
    if args.plot_data:
        lines = ["epoch,plan,lambda,healthy,target,vm_cost,faas_cost,total_cost"]
        for label, _, report in reports:
            for r in report.rows:
                lines.append(
                    f"{r.epoch},{label},{r.arrivals},{r.healthy},{r.target},"
                    f"{r.vm_cost!r},{r.faas_cost!r},{(r.vm_cost + r.faas_cost)!r}"
                )
        out = manifest.out_dir / "replay_plotdata.csv"
        atomic_write_text(out, "\n".join(lines) + "\n")
        print(f"wrote {out}")
    return 0


COMMANDS = {
    "feasible": cmd_feasible,
    "plan": cmd_plan,
    "sweep": cmd_sweep,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = build_manifest(args)
        return COMMANDS[args.command](manifest)
    except InfeasibleError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except SplitServeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
