"""Sweep the exit depth and watch the cheapest setup flip.

A one-parameter family of exit distributions slides the exit mass from
shallow (x=0) to deep (x=1). Costs are linear in the exit fractions, so
each setup pair crosses at most once; the two crossings that involve
the hybrid setup bound the window where it is the cheapest choice.
Writes demos/out/sweep.csv for plotting.
"""

import math
from pathlib import Path

from splitserve import ExitDistribution, Setup, SweepContext, default_catalog, sweep
from splitserve.cli import sweep_csv

from common import DISTRIBUTIONS, R_MAX, SLO, build_profile

profile = build_profile()
catalog = default_catalog()
shallow = DISTRIBUTIONS[0.50]
deep = DISTRIBUTIONS[0.85]


def blend(x: float) -> ExitDistribution:
    raw = [(1 - x) * a + x * b for a, b in zip(shallow.fractions, deep.fractions)]
    total = math.fsum(raw)
    return ExitDistribution(x, tuple(f / total for f in raw))


context = SweepContext(
    profile=profile,
    theta_f=catalog["serverless-8845mb"],
    theta_i=catalog["c6i.xlarge"],
    hybrid_theta_i=catalog["c6i.large"],
    cut_id=5,
    n=100.0,
    r_max=R_MAX,
    slo=SLO,
    dist_family=blend,
)
grid = [i / 50 for i in range(51)]
result = sweep("conf_thres", grid, context)

print("x = 0 is shallow-exiting traffic, x = 1 deep-exiting\n")
print(f"{'x':>5} {'serverless':>11} {'vm-only':>10} {'hybrid':>10}  cheapest")
for point in result.points[::5]:
    costs = point.costs
    cheapest = min(costs, key=lambda s: costs[s].total)
    print(f"{point.x:>5.2f} {costs[Setup.FAAS_ONLY].total:>11.6f} "
          f"{costs[Setup.IAAS_ONLY].total:>10.6f} {costs[Setup.HYBRID].total:>10.6f}"
          f"  {cheapest.value}")

window = sorted(c.x for c in result.crossings if Setup.HYBRID in c.pair)
print(f"\nhybrid is cheapest for x in [{window[0]:.3f}, {window[1]:.3f}]")

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
(out / "sweep.csv").write_text(sweep_csv(result))
print(f"wrote {out}/sweep.csv")
