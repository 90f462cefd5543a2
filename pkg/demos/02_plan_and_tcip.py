"""Offline configuration: filter by the latency objective, pick the
cheapest setup, and derive the traffic cost-indifference point that the
online scaler will use.

The feasibility filter is worst case: a full capacity batch traverses
every assigned stage with no early exits. The indifference point is the
residual load at which one more committed instance costs exactly as
much as spilling that residual to serverless.
"""

from splitserve import (
    Setup,
    default_catalog,
    evaluate_candidates,
    find_t_cip,
    select_plan,
    slo_feasible,
    t_cip_or_default,
)

from common import DISTRIBUTIONS, R_MAX, SLO, build_profile

profile = build_profile()
catalog = default_catalog()

print("worst-case batch latency per candidate (SLO = 6 s):")
for e in evaluate_candidates(profile, catalog, R_MAX, SLO):
    o = e.option
    mark = "ok " if e.feasible else "SLO"
    cut = f" cut={o.cut_id}" if o.cut_id else ""
    print(f"  [{mark}] {o.setup.value:<9} {o.theta_i or '-':<12} {o.theta_f}{cut}"
          f"  -> {e.worst_case_seconds:.2f} s")

feasible = slo_feasible(profile, catalog, R_MAX, SLO)
print(f"\n{len(feasible)} of {len(evaluate_candidates(profile, catalog, R_MAX, SLO))} "
      "candidates meet the objective")

print("\nlowest-cost setup per exit regime (n = 100 requests/epoch):")
for thres, dist in DISTRIBUTIONS.items():
    plan = select_plan(profile, dist, feasible, catalog, n=100.0, r_max=R_MAX, slo=SLO)
    print(f"  conf_thres {thres}: {plan.setup.value:<9} pool {'+'.join(plan.pool):<12}"
          f" cut={plan.cut_id}  t_cip={plan.t_cip:.1f} req/epoch")

print("\nindifference points at conf_thres 0.70:")
dist = DISTRIBUTIONS[0.70]
for setup, vm_id, cut in ((Setup.IAAS_ONLY, "c6i.xlarge", None), (Setup.HYBRID, "c6i.large", 5)):
    crossing = find_t_cip(setup, catalog[vm_id], catalog["serverless-8845mb"],
                          profile, dist, R_MAX, SLO, cut_id=cut)
    value = t_cip_or_default(crossing, R_MAX)
    note = "" if crossing is not None else " (no crossing: spill is always cheaper)"
    print(f"  {setup.value:<9} on {vm_id:<12} t_cip = {value:6.1f} requests/epoch{note}")

print("\nbelow t_cip the residual rides serverless; above it the scaler")
print("provisions one more instance for it.")
