"""Write the demo inputs as files so the CLI can be driven end to end.

Creates demos/data/{profile.json, dists.json, trace.csv}. The pricing
catalog is the package default; copy it with

    python3 -c "import json, splitserve.pricing as p; \
print(json.dumps(p.catalog_to_dict(p.default_catalog()), indent=2))" > demos/data/pricing.json

and edit prices there if yours differ.
"""

import json
from pathlib import Path

from splitserve import save_trace
from splitserve.profiles import distribution_to_dict, profile_to_dict

from common import DISTRIBUTIONS, build_profile, bursty_trace

out = Path(__file__).parent / "data"
out.mkdir(exist_ok=True)

(out / "profile.json").write_text(json.dumps(profile_to_dict(build_profile()), indent=2))
(out / "dists.json").write_text(
    json.dumps([distribution_to_dict(d) for d in DISTRIBUTIONS.values()], indent=2)
)
(out / "dist07.json").write_text(json.dumps(distribution_to_dict(DISTRIBUTIONS[0.70]), indent=2))
save_trace(bursty_trace(), out / "trace.csv")

print(f"wrote {out}/profile.json, dists.json, dist07.json, trace.csv")
print("try:  splitserve feasible --profile demos/data/profile.json")
