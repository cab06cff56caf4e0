"""Seeded generators for masks, data and random biclustering models.

All randomness comes from numpy's counter-based ``Philox`` bit generator,
seeded through ``SeedSequence``; the same arguments and seed give the same
draws on every platform. Independent streams inside one call are obtained
with :func:`derive_seed`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BiclusterAssignment, BlockValueMatrix, ObservedMatrix

MAX_LABEL_DRAWS = 100_000


def make_rng(seed):
    """Return the package's fixed generator family for ``seed``."""
    if int(seed) < 0:
        raise ValueError("seeds must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_seed(seed, *keys):
    """Deterministic 63-bit child seed of ``seed`` along the path ``keys``."""
    words = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint32)
    return int((int(words[0]) << 31) ^ int(words[1]))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "gaussian"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "bernoulli"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def _mirror_upper(a):
    """Copy the strict upper triangle onto the lower one and zero the diagonal."""
    upper = np.triu(a, 1)
    return upper + upper.T


def gen_mask(n1, n2, p, symmetric=False, seed=0):
    """MCAR observation mask: each entry observed independently with prob ``p``.

    In the symmetric case one draw is made per unordered pair ``i < j`` and
    mirrored; the diagonal is never observed.
    """
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if symmetric and n1 != n2:
        raise ValueError("symmetric mask must be square")
    u = make_rng(seed).random((n1, n2))
    mask = u < p
    if symmetric:
        mask = _mirror_upper(mask.astype(np.int8)).astype(bool)
    return mask


def gen_gaussian(theta, sigma, mask, seed=0, symmetric=False):
    """Observed Gaussian data ``X = theta + N(0, sigma^2)`` on the mask."""
    theta = np.asarray(theta, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if theta.shape != mask.shape:
        raise ValueError(f"dimension mismatch: {theta.shape} vs {mask.shape}")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    noise = make_rng(seed).standard_normal(theta.shape)
    x = theta + sigma * noise
    if symmetric:
        x = _mirror_upper(x)
    return ObservedMatrix.build(np.where(mask, x, 0.0), mask, symmetric)


def gen_bernoulli(theta, mask, symmetric=False, seed=0):
    """Observed Bernoulli data with success probabilities ``theta``."""
    theta = np.asarray(theta, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if theta.shape != mask.shape:
        raise ValueError(f"dimension mismatch: {theta.shape} vs {mask.shape}")
    if np.any((theta < 0) | (theta > 1)):
        raise ValueError("Bernoulli means must lie in [0, 1]")
    x = (make_rng(seed).random(theta.shape) < theta).astype(float)
    if symmetric:
        x = _mirror_upper(x)
    return ObservedMatrix.build(np.where(mask, x, 0.0), mask, symmetric)


def _nonempty_labels(rng, n, k):
    if k > n:
        raise ValueError(f"cannot fill {k} clusters with {n} items")
    for _ in range(MAX_LABEL_DRAWS):
        z = rng.integers(0, k, size=n)
        if np.unique(z).size == k:
            return z
    raise RuntimeError(f"no labeling with {k} nonempty clusters after {MAX_LABEL_DRAWS} draws")


def gen_random_model(spec, seed=0):
    """Random labels (all clusters nonempty) and block values for ``spec``.

    Block values are uniform on ``[-M, M]``, or on ``[0, rho]`` for an SBM.
    """
    rng = make_rng(seed)
    z1 = _nonempty_labels(rng, spec.n1, spec.k1)
    if spec.symmetric:
        assignment = BiclusterAssignment.symmetric(z1, spec.k)
    else:
        assignment = BiclusterAssignment(z1, _nonempty_labels(rng, spec.n2, spec.k2), spec.k1, spec.k2)
    if spec.kind == "sbm":
        q = rng.uniform(0.0, spec.rho, size=(spec.k1, spec.k2))
    else:
        q = rng.uniform(-spec.M, spec.M, size=(spec.k1, spec.k2))
    if spec.symmetric:
        q = np.triu(q) + np.triu(q, 1).T
    return assignment, BlockValueMatrix(q, spec.M)
