"""
Completing a partially observed matrix
======================================

Entries are seen independently with probability p. Dividing the observed
data by p gives an unbiased surrogate, and the same least-squares fit then
fills in the unobserved entries. Halving p roughly doubles the error.
"""

# %%
import numpy as np

from biclust import (
    BlockValueMatrix,
    FitConfig,
    ModelSpec,
    fit_observed,
    fit_unknown_p,
    gen_gaussian,
    gen_mask,
    gen_random_model,
    materialize_theta,
    surrogate,
)

# random communities, fixed well-separated block values
spec = ModelSpec.symmetric_model(80, 2, M=3.0)
assignment, _ = gen_random_model(spec, seed=0)
theta = materialize_theta(assignment, BlockValueMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]), 3.0), spec)

# %%
# One entry, many replicates: the surrogate X E / p averages to theta.
mask = gen_mask(1, 50_000, 0.5, seed=1)
x = gen_gaussian(np.full((1, 50_000), 0.7), 1.0, mask, seed=2)
print("mean surrogate", surrogate(x, 0.5).mean(), "target 0.7")

# %%
for p in (1.0, 0.5, 0.25):
    losses = []
    for t in range(5):
        x = gen_gaussian(theta, 1.0, gen_mask(80, 80, p, True, seed=10 + t), seed=20 + t, symmetric=True)
        fit = fit_observed(x, p, spec, FitConfig(restarts=8, seed=t))
        losses.append(np.sum((fit.theta_hat - theta) ** 2))
    print(f"p={p:<5} median loss {np.median(losses):8.2f}")

# %%
# When p is not known, the observed fraction stands in for it.
x = gen_gaussian(theta, 1.0, gen_mask(80, 80, 0.6, True, seed=3), seed=4, symmetric=True)
fit, p_hat = fit_unknown_p(x, spec, FitConfig(restarts=8))
print("p_hat", round(p_hat, 4), "loss", round(float(np.sum((fit.theta_hat - theta) ** 2)), 2))
