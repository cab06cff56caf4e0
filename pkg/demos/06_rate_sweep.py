"""
A Monte Carlo rate sweep
========================

The harness runs a grid of (n, p, ...) cells with seeds derived from each
cell's parameters, so rerunning or reordering a sweep reproduces it. The
report divides each loss by the rate (k^2 + n log k) / p; a flat scaled
loss across n means the error grows no faster than the rate.
"""

# %%
import json

from biclust import FitConfig
from biclust.harness import SweepConfig, rate_report, run_sweep

config = SweepConfig(
    "gaussian-sym",
    n=(32, 64),
    p=(1.0, 0.5),
    k=(2,),
    M=3.0,
    trials=4,
    q=((1.0, -1.0), (-1.0, 1.0)),
    fit=FitConfig(restarts=8),
)
records = run_sweep(config)
report = rate_report(records)

# %%
for cell in report["cells"]:
    print(f"n={cell['n1']:<3} p={cell['p']:<4} median loss {cell['loss_median']:8.2f}  scaled {cell['scaled_loss_median']:.4f}")
for r in report["p_ratios"]:
    print(f"n={r['n1']}: loss ratio p={r['p']} vs p={r['p_ref']}: {r['ratio']:.2f} (1/p scaling predicts {r['theory']:.1f})")

# %%
# The same sweep from the command line:
#   biclust sweep --config sweep.json --out results.csv --report report.json
print(json.dumps({"scenario": "gaussian-sym", "n": [32, 64], "p": [1.0, 0.5], "M": 3.0, "trials": 4}))
