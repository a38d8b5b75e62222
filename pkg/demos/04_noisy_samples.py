"""
Noisy samples
=============

Sampled extensions amplify noise only by a modest factor; the continuous
extension, which works from exact inner products, does much worse.
"""

from fourext.experiments import ExperimentSpec, format_rows, run

rows = []
for grid in ("discrete", "continuous"):
    for delta in (1e-4, 1e-8, 1e-12):
        spec = ExperimentSpec("noise", function="expx", grid=grid, Nrange="30", noise=delta, seed=7)
        rows += run(spec)

cols = ["grid", "N", "delta", "supError"]
print(format_rows(rows, columns=cols))
for r in rows:
    ratio = r.metrics["supError"] / r.params["delta"]
    print(f"{r.params['grid']:>10s}  delta = {r.params['delta']:.0e}  error / delta = {ratio:.3g}")
