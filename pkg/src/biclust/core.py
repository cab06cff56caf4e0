"""Domain types and masked-norm primitives.

Labels are stored 0-based internally (``0..k-1``); file I/O converts to the
1-based convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("asymmetric", "symmetric", "sbm")


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _check_same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


@dataclass(frozen=True)
class ObservedMatrix:
    """Partially observed data matrix.

    ``values`` holds the data, ``mask`` is true where an entry was observed.
    Unobserved entries carry value 0. In the symmetric case both arrays are
    symmetric, the diagonal is structurally zero and never counts as observed.
    """

    values: np.ndarray
    mask: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        values = _frozen(self.values)
        mask = _frozen(self.mask, dtype=bool)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        _check_same_shape(values, mask)
        if np.any(values[~mask] != 0):
            raise ValueError("unobserved entries must carry value 0")
        if self.symmetric:
            n1, n2 = values.shape
            if n1 != n2:
                raise ValueError("symmetric data must be square")
            if not np.array_equal(values, values.T) or not np.array_equal(mask, mask.T):
                raise ValueError("symmetric data must have symmetric values and mask")
            if np.any(np.diag(mask)):
                raise ValueError("symmetric mask must have a false diagonal")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def build(cls, values, mask=None, symmetric=False):
        """Normalizing constructor: zeroes unobserved entries and, for
        symmetric data, clears the diagonal of the mask."""
        values = np.array(values, dtype=float)
        mask = np.ones(values.shape, dtype=bool) if mask is None else np.array(mask, dtype=bool)
        _check_same_shape(values, mask)
        if symmetric and values.ndim == 2 and values.shape[0] == values.shape[1]:
            np.fill_diagonal(mask, False)
        values[~mask] = 0.0
        return cls(values, mask, symmetric)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class BiclusterAssignment:
    """Row labels ``z1`` in ``[0, k1)`` and column labels ``z2`` in ``[0, k2)``."""

    z1: np.ndarray
    z2: np.ndarray
    k1: int
    k2: int

    def __post_init__(self):
        z1 = _frozen(self.z1, dtype=np.int64)
        z2 = _frozen(self.z2, dtype=np.int64)
        for z, k in ((z1, self.k1), (z2, self.k2)):
            if z.ndim != 1:
                raise ValueError("labels must be 1-d")
            if k < 1 or (z.size and (z.min() < 0 or z.max() >= k)):
                raise ValueError(f"labels out of range for k={k}")
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)

    @classmethod
    def symmetric(cls, z, k):
        z = _frozen(z, dtype=np.int64)
        return cls(z, z, k, k)

    @property
    def is_symmetric(self):
        return self.k1 == self.k2 and np.array_equal(self.z1, self.z2)


@dataclass(frozen=True)
class BlockValueMatrix:
    q: np.ndarray
    bound: float

    def __post_init__(self):
        q = _frozen(np.atleast_2d(self.q))
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")
        if np.any(np.abs(q) > self.bound):
            raise ValueError(f"block values exceed bound {self.bound}")
        object.__setattr__(self, "q", q)

    @property
    def shape(self):
        return self.q.shape


@dataclass(frozen=True)
class ModelSpec:
    """Parameter space of the mean matrix.

    ``kind`` is one of ``asymmetric`` (k1 x k2 blocks, entries in [-M, M]),
    ``symmetric`` (k x k symmetric blocks, zero diagonal) or ``sbm``
    (symmetric, entries in [0, rho]). For ``sbm`` the fitting bound ``M``
    equals ``rho``.
    """

    kind: str
    n1: int
    n2: int
    k1: int
    k2: int
    M: float
    rho: float | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not (1 <= self.k1 <= self.n1 and 1 <= self.k2 <= self.n2):
            raise ValueError(
                f"cluster numbers must satisfy 1 <= k <= n, got k=({self.k1}, {self.k2}), "
                f"n=({self.n1}, {self.n2})"
            )
        if self.kind == "sbm":
            if self.rho is None or not 0 <= self.rho <= 1:
                raise ValueError("sbm requires 0 <= rho <= 1")
            if self.M != self.rho:
                raise ValueError("sbm bound M must equal rho")
        elif not self.M > 0:
            raise ValueError("M must be positive")
        if self.kind != "asymmetric" and (self.n1 != self.n2 or self.k1 != self.k2):
            raise ValueError("symmetric models need n1 == n2 and k1 == k2")

    @classmethod
    def asymmetric(cls, n1, n2, k1, k2, M):
        return cls("asymmetric", n1, n2, k1, k2, float(M))

    @classmethod
    def symmetric_model(cls, n, k, M):
        return cls("symmetric", n, n, k, k, float(M))

    @classmethod
    def sbm(cls, n, k, rho):
        return cls("sbm", n, n, k, k, float(rho), float(rho))

    @property
    def symmetric(self):
        return self.kind != "asymmetric"

    @property
    def n(self):
        return self.n1

    @property
    def k(self):
        return self.k1


def materialize_theta(assignment, q, spec=None):
    """Expand block values into the mean matrix ``theta[i, j] = q[z1[i], z2[j]]``.

    With a symmetric ``spec`` the diagonal is set to zero.
    """
    qa = q.q if isinstance(q, BlockValueMatrix) else np.asarray(q, dtype=float)
    if qa.shape != (assignment.k1, assignment.k2):
        raise ValueError(f"q has shape {qa.shape}, expected {(assignment.k1, assignment.k2)}")
    symmetric = False
    if spec is not None:
        if (spec.n1, spec.n2) != (assignment.z1.size, assignment.z2.size):
            raise ValueError("assignment does not match model dimensions")
        if (spec.k1, spec.k2) != (assignment.k1, assignment.k2):
            raise ValueError("assignment does not match model cluster numbers")
        symmetric = spec.symmetric
    theta = qa[np.ix_(assignment.z1, assignment.z2)]
    if symmetric:
        if not np.array_equal(qa, qa.T):
            raise ValueError("symmetric model needs a symmetric q")
        np.fill_diagonal(theta, 0.0)
    return theta


def restricted_sq_norm(a, mask):
    """Sum of squares of ``a`` over entries where ``mask`` is true."""
    a = np.asarray(a, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    _check_same_shape(a, mask)
    sel = a[mask]
    return float(sel @ sel)


def restricted_inner(a, b, mask):
    """Inner product of ``a`` and ``b`` over entries where ``mask`` is true."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    _check_same_shape(a, b, mask)
    return float(a[mask] @ b[mask])


def offdiag_mask(n):
    m = np.ones((n, n), dtype=bool)
    np.fill_diagonal(m, False)
    return m
