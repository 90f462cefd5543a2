"""Closed-form per-epoch cost of the three setups.

Every request enters at stage 1 and exits at some classifier; where the
exit mass sits decides which platform mix is cheapest:

  * shallow exits starve committed VMs, so pay-per-use wins;
  * deep exits keep a big VM busy, so the flat instance price wins;
  * exits concentrated mid-model favor a small VM for the busy head
    with the rarely-reached tail offloaded to serverless.
"""

from splitserve import cost_faas_only, cost_hybrid, cost_iaas_only, default_catalog

from common import DISTRIBUTIONS, R_MAX, SLO, build_profile

profile = build_profile()
catalog = default_catalog()
vm_big = catalog["c6i.xlarge"]
vm_small = catalog["c6i.large"]
fn = catalog["serverless-8845mb"]

N = 100  # requests per 6 s epoch, exactly one instance of capacity

print(f"per-epoch cost (USD) at n = {N} requests/epoch, cut = 5\n")
print(f"{'conf_thres':>10} {'serverless-only':>16} {'vm-only':>12} {'hybrid':>12}  cheapest")
for thres, dist in DISTRIBUTIONS.items():
    faas = cost_faas_only(N, profile, dist, fn)
    iaas = cost_iaas_only(N, R_MAX, vm_big, SLO, t_cip=90,
                          profile=profile, dist=dist, theta_f=fn)
    hybrid = cost_hybrid(N, R_MAX, vm_small, fn, 5, profile, dist, SLO, t_cip=90)
    costs = {"serverless": faas.total, "vm": iaas.total, "hybrid": hybrid.total}
    winner = min(costs, key=costs.get)
    print(f"{thres:>10} {faas.total:>16.6f} {iaas.total:>12.6f} {hybrid.total:>12.6f}  {winner}")

print("\nhybrid anatomy at conf_thres=0.70 (cut 5):")
hybrid = cost_hybrid(N, R_MAX, vm_small, fn, 5, profile, DISTRIBUTIONS[0.70], SLO, t_cip=90)
print(f"  flat VM share      {hybrid.vm_cost:.6f}  ({hybrid.vm_count} instance)")
print(f"  offloaded tail     {hybrid.faas_cost:.6f}")
print(f"  total              {hybrid.total:.6f}")

print("\nthe offloaded share shrinks as the cut moves deeper:")
for cut in range(1, 8):
    h = cost_hybrid(N, R_MAX, vm_small, fn, cut, profile, DISTRIBUTIONS[0.70], SLO, t_cip=90)
    bar = "#" * round(2e5 * h.faas_cost)
    print(f"  cut {cut}: faas {h.faas_cost:.6f} {bar}")
print("(cut 7 offloads nothing and equals the vm-only form on the small VM)")
