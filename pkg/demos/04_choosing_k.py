"""
Choosing the number of clusters
===============================

Split the observed entries at random into two halves. Fit one half for
every candidate (k1, k2) and score each fit on the other half; then swap.
The final estimate uses, on each entry, the fit from the half that did not
contain it.
"""

# %%
import numpy as np

from biclust import (
    BlockValueMatrix,
    FitConfig,
    KGrid,
    ModelSpec,
    adaptive_fit,
    gen_gaussian,
    gen_random_model,
    materialize_theta,
)

spec = ModelSpec.asymmetric(60, 60, 2, 2, M=3.0)
a, _ = gen_random_model(spec, seed=0)
theta = materialize_theta(a, BlockValueMatrix(np.array([[2.0, -2.0], [-2.0, 2.0]]), 3.0), spec)
x = gen_gaussian(theta, 1.0, np.ones((60, 60), bool), seed=1)

# %%
res = adaptive_fit(x, p=1.0, M=3.0, grid=KGrid.up_to(4), config=FitConfig(restarts=8))
print("chosen on each half:", res.k_hat_delta, res.k_hat_delta_c)
for k, loss in sorted(res.losses_delta.items()):
    print(k, round(loss, 1))

# %%
# The validation loss is flat past the truth: extra clusters only split
# existing blocks, so they cost variance without reducing bias.
print("loss", round(float(np.sum((res.theta_hat - theta) ** 2)), 2))
