"""
Fitting a block-constant matrix
===============================

A noisy 30 x 24 matrix whose mean is constant on 2 x 3 row/column blocks is
fit by constrained least squares. On a tiny matrix, exhaustive search over
all labelings gives the global optimum, which the alternating fit should
match.
"""

# %%
import numpy as np

from biclust import (
    FitConfig,
    ModelSpec,
    alternating_fit,
    exact_fit,
    fit_observed,
    gen_gaussian,
    gen_mask,
    gen_random_model,
    materialize_theta,
)

spec = ModelSpec.asymmetric(30, 24, 2, 3, M=2.0)
truth, q = gen_random_model(spec, seed=1)
theta = materialize_theta(truth, q, spec)
print("true block values\n", np.round(q.q, 3))

# %%
# Fully observed data with unit noise. Each row and column gets a label;
# the block values are clipped means, so |q| never exceeds M. Labels are
# only identified up to permutation, so rows and columns of the fitted q
# may come out in a different order from the truth.
x = gen_gaussian(theta, sigma=1.0, mask=gen_mask(30, 24, 1.0, seed=2), seed=3)
result = fit_observed(x, p=1.0, spec=spec, config=FitConfig(restarts=16, seed=0))
print("fitted block values\n", np.round(result.q_hat.q, 3))
print("squared error", np.sum((result.theta_hat - theta) ** 2))
print("zero estimate ", np.sum(theta**2))

# %%
# Global optimum on a 6 x 6 instance: 2^6 * 2^6 labelings.
small = ModelSpec.asymmetric(6, 6, 2, 2, M=2.0)
a, qs = gen_random_model(small, seed=4)
y = gen_gaussian(materialize_theta(a, qs, small), 0.5, np.ones((6, 6), bool), seed=5).values
best = exact_fit(y, small)
alt = alternating_fit(y, small, FitConfig(restarts=64))
print("exact objective      ", best.objective)
print("alternating objective", alt.objective)

# %%
# Each restart's objective never increases along the iterations.
for h in alt.histories[:3]:
    print(np.round(h, 4))
