"""Sparse graphon sampling and block-model graphon estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModelSpec, ObservedMatrix, offdiag_mask
from .estimator import FitConfig, alternating_fit, exact_fit
from .simulate import derive_seed, gen_bernoulli, gen_mask, make_rng


def _constant(x, y, rho):
    return np.full(np.broadcast(x, y).shape, rho)


def _bilinear(x, y, rho):
    return rho * x * y


def _smooth(x, y, rho):
    return rho * (x**2 + y**2) / 2.0


def _holder(x, y, rho, alpha):
    return rho * np.abs(x - y) ** min(alpha, 1.0)


# Hölder norms on {x >= y} (analytic):
#   constant   f = rho             -> rho for every alpha
#   bilinear   f = rho x y         -> 2 rho for alpha in (1, 2]; infinitely smooth
#   smooth     f = rho (x^2+y^2)/2 -> 3 rho for alpha in (1, 2]; infinitely smooth
#   holder     f = rho |x-y|^a     -> 2 rho (sup plus Hölder-a seminorm), a < 1
ZOO = {
    "constant": _constant,
    "bilinear": _bilinear,
    "smooth": _smooth,
    "holder": _holder,
}


@dataclass(frozen=True)
class GraphonSpec:
    """A built-in graphon ``f`` scaled to ``0 <= f <= rho``.

    ``alpha`` is the smoothness used by the bandwidth rule; for the
    ``holder`` graphon it is also the exponent of ``|x - y|``.
    """

    name: str = "smooth"
    rho: float = 1.0
    alpha: float = 1.0
    L: float = 3.0

    def __post_init__(self):
        if self.name not in ZOO:
            raise ValueError(f"unknown graphon {self.name!r}; choose from {sorted(ZOO)}")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if not self.alpha > 0 or not self.L > 0:
            raise ValueError("alpha and L must be positive")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.name == "holder":
            return _holder(x, y, self.rho, self.alpha)
        return ZOO[self.name](x, y, self.rho)

    def evaluate(self, xi):
        """``f(xi_i, xi_j)`` on all pairs, diagonal included."""
        xi = np.asarray(xi, dtype=float)
        return self(xi[:, None], xi[None, :])


def sample_graphon_network(g: GraphonSpec, n, seed=0, xi_sampler=None):
    """Draw latent positions and a symmetric Bernoulli network.

    ``xi_sampler(rng, n)`` replaces the default Uniform[0, 1] positions.
    Returns ``(xi, theta, x)`` with ``theta`` zero on the diagonal.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = make_rng(derive_seed(seed, 0))
    xi = rng.random(n) if xi_sampler is None else np.asarray(xi_sampler(rng, n), dtype=float)
    theta = g.evaluate(xi)
    np.fill_diagonal(theta, 0.0)
    mask = gen_mask(n, n, 1.0, symmetric=True, seed=derive_seed(seed, 1))
    x = gen_bernoulli(theta, mask, symmetric=True, seed=derive_seed(seed, 2))
    return xi, theta, x


def graphon_bandwidth(n, alpha):
    """Number of blocks ``ceil(n ** (1 / (1 + min(alpha, 1))))``."""
    if n < 1 or not alpha > 0:
        raise ValueError("need n >= 1 and alpha > 0")
    # pow can land a few ulps above an exact integer root (64 ** (2/3))
    k = math.ceil(n ** (1.0 / (1.0 + min(alpha, 1.0))) - 1e-9)
    return max(1, min(k, n))


def estimate_graphon(x: ObservedMatrix, alpha, rho, config=FitConfig(), normalize=False, exact=False):
    """Block-model estimate of the graphon at the sampled positions.

    Fits a symmetric block model to the adjacency matrix with
    ``k = graphon_bandwidth(n, alpha)`` blocks and bound ``rho``. With
    ``normalize=True`` the output is divided by ``rho`` (the convention in
    which ``theta = rho f`` and ``f`` integrates to one).
    """
    if not x.symmetric:
        raise ValueError("graphon estimation needs a symmetric adjacency matrix")
    n = x.shape[0]
    spec = ModelSpec.symmetric_model(n, graphon_bandwidth(n, alpha), rho)
    y = np.asarray(x.values, dtype=float)
    result = exact_fit(y, spec) if exact else alternating_fit(y, spec, config)
    f_hat = result.theta_hat / rho if normalize else result.theta_hat
    return f_hat, result


def graphon_mse(f_hat, g: GraphonSpec, xi, offdiag=False):
    """Mean squared error against ``f`` over all ``n^2`` sampled pairs.

    Diagonal terms compare ``f_hat[i, i]`` with ``f(xi_i, xi_i)``. With
    ``offdiag=True`` only pairs ``i != j`` are averaged.
    """
    f_hat = np.asarray(f_hat, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    if f_hat.shape != (n, n):
        raise ValueError(f"f_hat has shape {f_hat.shape}, expected {(n, n)}")
    r = f_hat - g.evaluate(xi)
    if offdiag:
        return float((r[offdiag_mask(n)] ** 2).mean()) if n > 1 else 0.0
    return float(np.vdot(r, r)) / n**2
