"""Adaptation to unknown cluster numbers and to an unknown observation rate."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ModelSpec, ObservedMatrix, offdiag_mask, restricted_sq_norm
from .estimator import FitConfig, FitResult, fit, surrogate
from .simulate import derive_seed, make_rng

SELECTION_RESTARTS = 8


@dataclass(frozen=True)
class SplitData:
    """Two-fold split of the surrogate data.

    ``y_delta = 2 X E T / p`` and ``y_delta_c = 2 X E (1 - T) / p`` where
    ``T`` is the Bernoulli(1/2) split indicator stored as ``delta_mask``.
    """

    y_delta: np.ndarray
    y_delta_c: np.ndarray
    delta_mask: np.ndarray
    symmetric: bool = False

    @property
    def validation_mask_delta(self):
        """Entries on which a fit to ``y_delta`` is validated (T = 0)."""
        out = ~self.delta_mask
        if self.symmetric:
            out &= offdiag_mask(out.shape[0])
        return out

    @property
    def validation_mask_delta_c(self):
        out = self.delta_mask.copy()
        if self.symmetric:
            out &= offdiag_mask(out.shape[0])
        return out


@dataclass(frozen=True)
class KGrid:
    k1_values: tuple
    k2_values: tuple

    def __post_init__(self):
        if not self.k1_values or not self.k2_values:
            raise ValueError("cluster grid must be nonempty")
        if min(self.k1_values) < 1 or min(self.k2_values) < 1:
            raise ValueError("cluster numbers must be >= 1")
        object.__setattr__(self, "k1_values", tuple(sorted(set(map(int, self.k1_values)))))
        object.__setattr__(self, "k2_values", tuple(sorted(set(map(int, self.k2_values)))))

    @classmethod
    def default(cls, n1, n2):
        """``1..min(n, ceil(2 sqrt(n)))`` on each side."""
        return cls(
            tuple(range(1, min(n1, math.ceil(2 * math.sqrt(n1))) + 1)),
            tuple(range(1, min(n2, math.ceil(2 * math.sqrt(n2))) + 1)),
        )

    @classmethod
    def up_to(cls, kmax1, kmax2=None):
        return cls(tuple(range(1, kmax1 + 1)), tuple(range(1, (kmax2 or kmax1) + 1)))

    def points(self, symmetric=False):
        if symmetric:
            return [(k, k) for k in self.k1_values]
        return [(a, b) for a in self.k1_values for b in self.k2_values]


def split_data(x: ObservedMatrix, p, seed=0) -> SplitData:
    """Draw the half-sample indicator ``T`` and build both halves.

    For symmetric data ``T`` is drawn per unordered pair and mirrored, and
    the diagonal is left out of ``delta``.
    """
    y = surrogate(x, p)
    n1, n2 = y.shape
    t = make_rng(seed).random((n1, n2)) < 0.5
    if x.symmetric:
        upper = np.triu(t, 1)
        t = upper | upper.T
    return SplitData(
        y_delta=np.where(t, 2.0 * y, 0.0),
        y_delta_c=np.where(t, 0.0, 2.0 * y),
        delta_mask=t,
        symmetric=x.symmetric,
    )


def _spec_for(shape, k1, k2, M, symmetric):
    n1, n2 = shape
    if symmetric:
        return ModelSpec.symmetric_model(n1, k1, M)
    return ModelSpec.asymmetric(n1, n2, k1, k2, M)


def _validate(y_train, y_valid, valid_mask, grid, M, config, symmetric):
    losses = {}
    for k1, k2 in grid.points(symmetric):
        if k1 > y_train.shape[0] or k2 > y_train.shape[1]:
            continue
        result = fit(y_train, _spec_for(y_train.shape, k1, k2, M, symmetric), config)
        losses[(k1, k2)] = restricted_sq_norm(result.theta_hat - y_valid, valid_mask)
    return losses


def _argmin_k(losses, valid_mask):
    if not valid_mask.any() or not losses:
        return (1, 1)
    return min(losses, key=lambda k: (losses[k], k))


def select_k(split: SplitData, grid: KGrid, M, config=FitConfig(), symmetric=None, *, reverse=False):
    """Cluster numbers minimizing the held-out loss.

    Fits ``y_delta`` at every grid point and scores each fit by its squared
    distance to ``y_delta_c`` on the complement of ``delta``. With
    ``reverse=True`` the roles of the two halves are swapped. Returns
    ``((k1, k2), losses)``; ties go to the lexicographically smallest pair.
    """
    symmetric = split.symmetric if symmetric is None else symmetric
    if reverse:
        y_train, y_valid, valid = split.y_delta_c, split.y_delta, split.validation_mask_delta_c
    else:
        y_train, y_valid, valid = split.y_delta, split.y_delta_c, split.validation_mask_delta
    losses = _validate(y_train, y_valid, valid, grid, M, config, symmetric)
    return _argmin_k(losses, valid), losses


@dataclass(frozen=True)
class AdaptResult:
    theta_hat: np.ndarray
    k_hat_delta: tuple
    k_hat_delta_c: tuple
    losses_delta: dict
    losses_delta_c: dict
    p_hat: float
    split: SplitData


def adaptive_fit(
    x: ObservedMatrix,
    p,
    M,
    grid: KGrid | None = None,
    config=FitConfig(),
    symmetric=None,
    selection_restarts=SELECTION_RESTARTS,
) -> AdaptResult:
    """Cross-fitted estimator with data-driven cluster numbers.

    Each half selects its own ``(k1, k2)`` by validating on the other half;
    the output uses the fit from the opposite half on every entry. When
    ``p`` is None it is replaced by :func:`estimate_p`. The split indicator
    is seeded with ``derive_seed(config.seed, 1)``.
    """
    symmetric = x.symmetric if symmetric is None else symmetric
    if p is None:
        p = estimate_p(x.mask, symmetric)
    grid = grid or KGrid.default(*x.shape)
    split = split_data(x, p, seed=derive_seed(config.seed, 1))
    sel_config = replace(config, restarts=min(selection_restarts, config.restarts))
    k_delta, losses_delta = select_k(split, grid, M, sel_config, symmetric)
    k_delta_c, losses_delta_c = select_k(split, grid, M, sel_config, symmetric, reverse=True)
    theta_delta = fit(split.y_delta, _spec_for(x.shape, *k_delta, M, symmetric), config).theta_hat
    theta_delta_c = fit(split.y_delta_c, _spec_for(x.shape, *k_delta_c, M, symmetric), config).theta_hat
    theta = np.where(split.delta_mask, theta_delta_c, theta_delta)
    return AdaptResult(theta, k_delta, k_delta_c, losses_delta, losses_delta_c, float(p), split)


def estimate_p(mask, symmetric=False):
    """Observed fraction of entries (of pairs ``i < j`` when symmetric)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.size == 0:
        raise ValueError("mask must be a nonempty 2-d array")
    if symmetric:
        n = mask.shape[0]
        if n * (n - 1) == 0:
            raise ValueError("symmetric p estimate needs n >= 2")
        return int(np.triu(mask, 1).sum()) / (n * (n - 1) / 2)
    return int(mask.sum()) / mask.size


def fit_unknown_p(x: ObservedMatrix, spec: ModelSpec, config=FitConfig(), exact=False) -> tuple[FitResult, float]:
    """Least-squares fit with the plug-in rate ``p_hat``.

    Returns the fit and ``p_hat``.
    """
    if not x.mask.any():
        raise ValueError("no observed entries")
    p_hat = estimate_p(x.mask, spec.symmetric)
    if p_hat == 0:
        raise ValueError("no observed entries")
    if x.symmetric != spec.symmetric:
        raise ValueError("data symmetry does not match the model")
    return fit(surrogate(x, p_hat), spec, config, exact), p_hat
