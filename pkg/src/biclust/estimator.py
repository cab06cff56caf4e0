"""Constrained least-squares fitting of biclustering mean matrices.

Given surrogate data ``Y = X * E / p`` the estimator minimizes
``||Y - theta||^2`` over all ``theta`` with ``k1 x k2`` constant blocks
bounded by ``M``. For fixed labels the optimal block values are the clipped
block means; the labels are found either by exhaustive enumeration
(:func:`exact_fit`, tiny problems) or by Lloyd-style alternating
minimization with random restarts (:func:`alternating_fit`).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BiclusterAssignment,
    BlockValueMatrix,
    ObservedMatrix,
)
from .simulate import make_rng

EXACT_BUDGET = 10**7
# relative slack allowed when asserting that the objective never increases
MONOTONE_SLACK = 1e-12


class BudgetExceededError(RuntimeError):
    """Exhaustive search would enumerate more labelings than allowed."""


class MonotonicityError(RuntimeError):
    """Alternating minimization increased its objective."""


@dataclass(frozen=True)
class FitConfig:
    restarts: int = 32
    max_iters: int = 100
    tol: float = 1e-9
    seed: int = 0
    init: str = "random"
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.init != "random":
            raise ValueError("only random initialization is supported")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class FitResult:
    theta_hat: np.ndarray
    assignment: BiclusterAssignment
    q_hat: BlockValueMatrix
    objective: float
    iterations: int
    restarts_used: int
    # objective after every block update, per restart
    histories: tuple = field(default=(), repr=False)


def surrogate(x: ObservedMatrix, p: float) -> np.ndarray:
    """Inverse-probability weighted data ``X * E / p`` (zero where unobserved)."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    return np.where(x.mask, x.values / p, 0.0)


def _one_hot(z, k):
    out = np.zeros((z.size, k))
    out[np.arange(z.size), z] = 1.0
    return out


def block_means(y, assignment, symmetric=False):
    """Block averages of ``y`` and the number of cells in each block.

    In the symmetric case only ordered pairs ``i != j`` are counted. Empty
    blocks get mean 0 and count 0.
    """
    y = np.asarray(y, dtype=float)
    if symmetric:
        y = y.copy()
        np.fill_diagonal(y, 0.0)
    a = _one_hot(assignment.z1, assignment.k1)
    b = _one_hot(assignment.z2, assignment.k2)
    sums = a.T @ y @ b
    counts = np.outer(a.sum(0), b.sum(0))
    if symmetric:
        # a.T @ y @ a is symmetric only up to rounding
        sums = (sums + sums.T) / 2.0
        counts -= np.diag(a.sum(0))
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return means, counts.astype(np.int64)


def clip_block_values(means, bound) -> BlockValueMatrix:
    """``sign(m) * min(|m|, M)`` entrywise."""
    means = np.asarray(means, dtype=float)
    return BlockValueMatrix(np.sign(means) * np.minimum(np.abs(means), bound), bound)


def ls_objective(y, theta, symmetric=False):
    """``||Y - theta||^2``; the symmetric case skips the diagonal."""
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if y.shape != theta.shape:
        raise ValueError(f"dimension mismatch: {y.shape} vs {theta.shape}")
    r = y - theta
    if symmetric:
        r = r.copy()
        np.fill_diagonal(r, 0.0)
    return float(np.vdot(r, r))


def fit_given_labels(y, assignment, M, symmetric=False):
    """Optimal bounded block values for fixed labels, and the fitted matrix."""
    means, _ = block_means(y, assignment, symmetric)
    q = clip_block_values(means, M)
    theta = q.q[np.ix_(assignment.z1, assignment.z2)]
    if symmetric:
        np.fill_diagonal(theta, 0.0)
    return q, theta


def refine_labels(y, q, assignment, side="rows", symmetric=False):
    """One pass of per-row (or per-column) label reassignment.

    Each label moves to the block row of ``q`` that minimizes its squared
    residual with everything else held fixed; ties go to the smallest label.
    Asymmetric rows are independent and updated together; the symmetric case
    updates one node at a time against the current labels.
    """
    y = np.asarray(y, dtype=float)
    qa = q.q if isinstance(q, BlockValueMatrix) else np.asarray(q, dtype=float)
    if symmetric:
        z = _refine_symmetric(y, qa, np.array(assignment.z1))
        return BiclusterAssignment.symmetric(z, assignment.k1)
    if side == "rows":
        other = _one_hot(assignment.z2, assignment.k2)
        sums = y @ other  # (n1, k2)
        sizes = other.sum(0)
        cost = -2.0 * sums @ qa.T + (qa**2 @ sizes)[None, :]
        return BiclusterAssignment(np.argmin(cost, axis=1), assignment.z2, assignment.k1, assignment.k2)
    if side == "columns":
        other = _one_hot(assignment.z1, assignment.k1)
        sums = y.T @ other  # (n2, k1)
        sizes = other.sum(0)
        cost = -2.0 * sums @ qa + (sizes @ qa**2)[None, :]
        return BiclusterAssignment(assignment.z1, np.argmin(cost, axis=1), assignment.k1, assignment.k2)
    raise ValueError(f"side must be 'rows' or 'columns', got {side!r}")


def _refine_symmetric(y, q, z):
    n = z.size
    k = q.shape[0]
    y = y.copy()
    np.fill_diagonal(y, 0.0)
    onehot = _one_hot(z, k)
    sums = y @ onehot  # sums[i, b] = sum over j != i with z[j] == b
    sizes = onehot.sum(0)
    q2 = q**2
    for i in range(n):
        old = z[i]
        sizes[old] -= 1.0
        cost = -2.0 * q @ sums[i] + q2 @ sizes
        new = int(np.argmin(cost))
        sizes[new] += 1.0
        if new != old:
            z[i] = new
            sums[:, old] -= y[:, i]
            sums[:, new] += y[:, i]
    return z


def _check_k(y, k1, k2):
    n1, n2 = y.shape
    if not (1 <= k1 <= n1 and 1 <= k2 <= n2):
        raise ValueError(f"cluster numbers ({k1}, {k2}) invalid for a {n1}x{n2} matrix")


def _single_restart(y, k1, k2, M, symmetric, max_iters, tol, seed):
    rng = make_rng(seed)
    n1, n2 = y.shape
    if symmetric:
        assignment = BiclusterAssignment.symmetric(rng.integers(0, k1, size=n1), k1)
    else:
        assignment = BiclusterAssignment(rng.integers(0, k1, size=n1), rng.integers(0, k2, size=n2), k1, k2)
    q, theta = fit_given_labels(y, assignment, M, symmetric)
    obj = ls_objective(y, theta, symmetric)
    history = [obj]
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        if symmetric:
            assignment = refine_labels(y, q, assignment, symmetric=True)
        else:
            assignment = refine_labels(y, q, assignment, "rows")
            assignment = refine_labels(y, q, assignment, "columns")
        q, theta = fit_given_labels(y, assignment, M, symmetric)
        new = ls_objective(y, theta, symmetric)
        if new > obj + MONOTONE_SLACK * max(1.0, abs(obj)):
            raise MonotonicityError(f"objective increased from {obj!r} to {new!r}")
        history.append(new)
        decrease = obj - new
        obj = new
        if decrease < tol:
            break
    return obj, assignment, q, theta, iterations, history


def alternating_fit(y, spec, config=FitConfig()) -> FitResult:
    """Best of ``config.restarts`` alternating-minimization runs.

    Restart ``r`` starts from uniform random labels drawn with seed
    ``config.seed + r``. Each run alternates clipped block means with label
    refinement until the objective decreases by less than ``config.tol``.
    Ties between restarts go to the lowest restart index.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.n1, spec.n2):
        raise ValueError(f"data shape {y.shape} does not match model {(spec.n1, spec.n2)}")
    _check_k(y, spec.k1, spec.k2)
    args = (y, spec.k1, spec.k2, spec.M, spec.symmetric, config.max_iters, config.tol)
    seeds = [config.seed + r for r in range(config.restarts)]
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            runs = list(pool.map(lambda s: _single_restart(*args, s), seeds))
    else:
        runs = [_single_restart(*args, s) for s in seeds]
    best = min(range(len(runs)), key=lambda r: (runs[r][0], r))
    obj, assignment, q, theta, iterations, _ = runs[best]
    return FitResult(
        theta_hat=theta,
        assignment=assignment,
        q_hat=q,
        objective=obj,
        iterations=iterations,
        restarts_used=config.restarts,
        histories=tuple(tuple(run[5]) for run in runs),
    )


def _label_block(start, stop, n, k):
    """Labelings number ``start..stop-1`` in lexicographic order, as rows."""
    idx = np.arange(start, stop, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % k


def _batched_one_hot(z, k):
    return (z[:, :, None] == np.arange(k)[None, None, :]).astype(float)


def _score(sums, counts, M, y_sq):
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    q = np.sign(means) * np.minimum(np.abs(means), M)
    axes = tuple(range(sums.ndim - 2, sums.ndim))
    return y_sq - 2.0 * (q * sums).sum(axis=axes) + (q * q * counts).sum(axis=axes)


def exact_fit(y, spec, budget=EXACT_BUDGET, chunk=1 << 16) -> FitResult:
    """Global minimizer by enumerating every labeling (non-surjective ones too).

    Ties go to the lexicographically smallest ``(z1, z2)``. Raises
    :class:`BudgetExceededError` when the number of labelings exceeds
    ``budget``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.n1, spec.n2):
        raise ValueError(f"data shape {y.shape} does not match model {(spec.n1, spec.n2)}")
    _check_k(y, spec.k1, spec.k2)
    n1, n2, k1, k2 = spec.n1, spec.n2, spec.k1, spec.k2
    symmetric = spec.symmetric
    if symmetric:
        y = y.copy()
        np.fill_diagonal(y, 0.0)
    total1 = k1**n1
    total = total1 if symmetric else total1 * k2**n2
    if total > budget:
        raise BudgetExceededError(f"{total} labelings exceed the exact-fit budget of {budget}")
    y_sq = float(np.vdot(y, y))
    tie = 1e-12 * max(1.0, y_sq)
    best_val, best_idx = np.inf, -1

    def consider(scores, offset):
        nonlocal best_val, best_idx
        lo = scores.min()
        if lo < best_val - tie:
            best_val = lo
            best_idx = offset + int(np.flatnonzero(scores <= lo + tie)[0])

    if symmetric:
        for start in range(0, total1, chunk):
            z = _label_block(start, min(start + chunk, total1), n1, k1)
            a = _batched_one_hot(z, k1)
            sums = np.einsum("lia,ij,ljb->lab", a, y, a)
            sums = (sums + sums.transpose(0, 2, 1)) / 2.0
            sizes = a.sum(1)
            counts = sizes[:, :, None] * sizes[:, None, :] - sizes[:, :, None] * np.eye(k1)
            consider(_score(sums, counts, spec.M, y_sq), start)
        assignment = BiclusterAssignment.symmetric(_label_block(best_idx, best_idx + 1, n1, k1)[0], k1)
    else:
        total2 = k2**n2
        c1 = max(1, chunk // total2) if total2 <= chunk else 1
        c2 = min(total2, chunk)
        for s1 in range(0, total1, c1):
            a = _batched_one_hot(_label_block(s1, min(s1 + c1, total1), n1, k1), k1)
            partial = np.einsum("lia,ij->laj", a, y)
            sizes1 = a.sum(1)
            for s2 in range(0, total2, c2):
                b = _batched_one_hot(_label_block(s2, min(s2 + c2, total2), n2, k2), k2)
                sums = np.einsum("laj,mjb->lmab", partial, b)
                counts = sizes1[:, None, :, None] * b.sum(1)[None, :, None, :]
                scores = _score(sums, counts, spec.M, y_sq)
                # flatten row-major so that (z1, z2) order is lexicographic;
                # only contiguous when the z2 chunk covers all of z2
                if c2 == total2:
                    consider(scores.ravel(), s1 * total2)
                else:
                    consider(scores[0], s1 * total2 + s2)
        i1, i2 = divmod(best_idx, total2)
        assignment = BiclusterAssignment(
            _label_block(i1, i1 + 1, n1, k1)[0], _label_block(i2, i2 + 1, n2, k2)[0], k1, k2
        )
    q, theta = fit_given_labels(y, assignment, spec.M, symmetric)
    return FitResult(
        theta_hat=theta,
        assignment=assignment,
        q_hat=q,
        objective=ls_objective(y, theta, symmetric),
        iterations=0,
        restarts_used=0,
        histories=(),
    )


def fit(y, spec, config=FitConfig(), exact=False) -> FitResult:
    return exact_fit(y, spec) if exact else alternating_fit(y, spec, config)


def fit_observed(x: ObservedMatrix, p, spec, config=FitConfig(), exact=False) -> FitResult:
    """Known-``p`` pipeline: surrogate data followed by a least-squares fit."""
    if x.symmetric != spec.symmetric:
        raise ValueError("data symmetry does not match the model")
    return fit(surrogate(x, p), spec, config, exact)


__all__ = [
    "EXACT_BUDGET",
    "BudgetExceededError",
    "FitConfig",
    "FitResult",
    "MonotonicityError",
    "alternating_fit",
    "block_means",
    "clip_block_values",
    "exact_fit",
    "fit",
    "fit_given_labels",
    "fit_observed",
    "ls_objective",
    "refine_labels",
    "surrogate",
]
