"""
Stochastic block models and sparse networks
===========================================

For a network, X is a 0/1 adjacency matrix with edge probabilities bounded
by rho. When rho is tiny, the all-zero estimate can beat the fitted block
model: there is too little signal to learn anything.
"""

# %%
from biclust import FitConfig
from biclust.harness import SweepConfig, rate_report, run_sweep

config = SweepConfig("sbm", n=(100,), k=(2,), rho=(0.005, 0.05, 0.5), trials=5, fit=FitConfig(restarts=8))
report = rate_report(run_sweep(config))

# %%
for row in report["sparse_sbm"]:
    print(
        f"rho={row['rho']:<6} LS {row['ls_loss_median']:9.4f}  zero {row['zero_loss_median']:9.4f}"
        f"  zero wins: {row['zero_not_worse']}"
    )
# the crossover sits near (k^2 + n log k) / n^2
print("threshold", round(report["sparse_sbm"][0]["rate_threshold"], 4))
