"""
Graphon estimation
==================

A graphon f on [0,1]^2 generates a network by drawing a latent position per
node and linking i and j with probability f(xi_i, xi_j). A block model with
about n^(1/2) communities approximates a Lipschitz graphon, and the error
shrinks as n grows.
"""

# %%
import numpy as np

from biclust import FitConfig, GraphonSpec, estimate_graphon, graphon_bandwidth, graphon_mse, sample_graphon_network

g = GraphonSpec("smooth", rho=1.0, alpha=1.0)

# %%
for n in (50, 100, 200):
    mse = []
    for t in range(3):
        xi, _, x = sample_graphon_network(g, n, seed=t)
        f_hat, _ = estimate_graphon(x, alpha=1.0, rho=1.0, config=FitConfig(restarts=4, seed=t))
        mse.append(graphon_mse(f_hat, g, xi))
    print(f"n={n:<4} k={graphon_bandwidth(n, 1.0):<3} median MSE {np.median(mse):.4f}")

# %%
# Rougher graphons get more blocks: k = ceil(n^(1/(1+alpha))) for alpha < 1.
print([graphon_bandwidth(100, a) for a in (0.25, 0.5, 1.0, 2.0)])
