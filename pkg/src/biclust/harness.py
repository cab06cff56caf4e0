"""Monte Carlo experiments checking how the estimation error scales.

A sweep is the Cartesian product of parameter lists; every cell is run for a
number of trials. A trial's seed depends only on the base seed, a stable hash
of the cell's parameters and the trial index, so reordering a sweep never
changes its records.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .adapt import KGrid, adaptive_fit, fit_unknown_p
from .core import BlockValueMatrix, ModelSpec, materialize_theta
from .estimator import FitConfig, fit_observed
from .graphon import GraphonSpec, estimate_graphon, graphon_bandwidth, graphon_mse, sample_graphon_network
from .simulate import derive_seed, gen_bernoulli, gen_gaussian, gen_mask, gen_random_model

SCENARIOS = ("gaussian-asym", "gaussian-sym", "sbm", "graphon", "adapt", "unknown-p")
SYMMETRIC_SCENARIOS = ("gaussian-sym", "sbm", "graphon")
MODES = ("alternating", "exact")

RECORD_COLUMNS = (
    "scenario", "n1", "n2", "k1", "k2", "p", "sigma", "rho", "M", "mode",
    "seed", "loss", "scaled_loss", "objective", "seconds", "trial", "zero_loss",
)  # fmt: skip


@dataclass(frozen=True)
class Cell:
    """One point of a sweep. Matrices are square, ``n x n``."""

    scenario: str
    n: int
    k: int = 2
    p: float = 1.0
    sigma: float = 1.0
    rho: float = 1.0
    M: float = 1.0
    mode: str = "alternating"
    # fixed k x k block values; labels are still drawn at random
    q: tuple | None = None
    graphon: str = "smooth"
    alpha: float = 1.0
    kmax: int | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        # normalize types so the identity hash ignores int/float spelling
        for name in ("p", "sigma", "rho", "M", "alpha"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        if self.q is not None:
            object.__setattr__(self, "q", tuple(tuple(float(v) for v in row) for row in self.q))

    @property
    def symmetric(self):
        return self.scenario in SYMMETRIC_SCENARIOS

    def identity(self):
        return json.dumps(asdict(self), sort_keys=True)

    def trial_seed(self, base_seed, trial):
        digest = hashlib.sha256(self.identity().encode()).digest()
        return derive_seed(base_seed, int.from_bytes(digest[:4], "big"), int.from_bytes(digest[4:8], "big"), trial)


@dataclass(frozen=True)
class TrialRecord:
    scenario: str
    n1: int
    n2: int
    k1: int
    k2: int
    p: float
    sigma: float | None
    rho: float | None
    M: float
    mode: str
    seed: int
    loss: float
    scaled_loss: float
    objective: float | None
    seconds: float | None
    trial: int = 0
    # loss of the all-zero estimator, sum of theta^2
    zero_loss: float = 0.0

    def row(self):
        return [getattr(self, c) for c in RECORD_COLUMNS]


def rate_denominator(n1, n2, k1, k2, symmetric):
    """``k1 k2 + n1 log k1 + n2 log k2``, or ``k^2 + n log k`` when symmetric."""
    if symmetric:
        return k1 * k1 + n1 * math.log(k1)
    return k1 * k2 + n1 * math.log(k1) + n2 * math.log(k2)


def scaled_loss(loss, p, n1, n2, k1, k2, symmetric):
    return loss * p / rate_denominator(n1, n2, k1, k2, symmetric)


@dataclass(frozen=True)
class SweepConfig:
    scenario: str
    n: tuple = (64,)
    p: tuple = (1.0,)
    k: tuple = (2,)
    sigma: tuple = (1.0,)
    rho: tuple = (1.0,)
    M: float = 1.0
    trials: int = 10
    mode: str = "alternating"
    fit: FitConfig = field(default_factory=FitConfig)
    base_seed: int = 0
    q: tuple | None = None
    graphon: str = "smooth"
    alpha: float = 1.0
    kmax: int | None = None

    def __post_init__(self):
        for name in ("n", "p", "k", "sigma", "rho"):
            value = getattr(self, name)
            if isinstance(value, (int, float)):
                value = (value,)
            if not value:
                raise ValueError(f"sweep list {name!r} is empty")
            object.__setattr__(self, name, tuple(value))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        if "fit" in d:
            d["fit"] = FitConfig(**d["fit"])
        if d.get("q") is not None:
            d["q"] = tuple(tuple(row) for row in d["q"])
        return cls(**d)

    def cells(self):
        return [
            Cell(self.scenario, n, k, p, sigma, rho, self.M, self.mode, self.q, self.graphon, self.alpha, self.kmax)
            for n, p, k, sigma, rho in itertools.product(self.n, self.p, self.k, self.sigma, self.rho)
        ]


def _truth(cell, spec, seed):
    assignment, q = gen_random_model(spec, seed)
    if cell.q is not None:
        q = BlockValueMatrix(np.array(cell.q), spec.M)
    return assignment, q, materialize_theta(assignment, q, spec)


def run_trial(cell: Cell, seed, fit_config=FitConfig(), timing=False, trial=0) -> TrialRecord:
    """Generate one dataset for ``cell``, fit it, and score against the truth.

    ``seconds`` is only measured when ``timing`` is true; otherwise it is
    None so that records are reproducible bit for bit.
    """
    start = time.perf_counter()
    n, k = cell.n, cell.k
    config = FitConfig(
        restarts=fit_config.restarts,
        max_iters=fit_config.max_iters,
        tol=fit_config.tol,
        seed=derive_seed(seed, 3),
    )
    exact = cell.mode == "exact"
    sigma, rho, M, objective = cell.sigma, None, cell.M, None
    p = cell.p

    if cell.scenario == "graphon":
        g = GraphonSpec(cell.graphon, cell.rho, cell.alpha)
        xi, theta, x = sample_graphon_network(g, n, seed=derive_seed(seed, 0))
        f_hat, result = estimate_graphon(x, cell.alpha, cell.rho, config, exact=exact)
        loss = graphon_mse(f_hat, g, xi)
        k = graphon_bandwidth(n, cell.alpha)
        sigma, rho, M, p, objective = None, cell.rho, cell.rho, 1.0, result.objective
    else:
        if cell.scenario == "sbm":
            spec = ModelSpec.sbm(n, k, cell.rho)
            sigma, rho, M = None, cell.rho, cell.rho
        elif cell.symmetric:
            spec = ModelSpec.symmetric_model(n, k, cell.M)
        else:
            spec = ModelSpec.asymmetric(n, n, k, k, cell.M)
        _, _, theta = _truth(cell, spec, derive_seed(seed, 0))
        mask = gen_mask(n, n, cell.p, spec.symmetric, seed=derive_seed(seed, 1))
        if cell.scenario == "sbm":
            x = gen_bernoulli(theta, mask, True, seed=derive_seed(seed, 2))
        else:
            x = gen_gaussian(theta, cell.sigma, mask, seed=derive_seed(seed, 2), symmetric=spec.symmetric)

        if cell.scenario == "adapt":
            kmax = cell.kmax or max(KGrid.default(n, n).k1_values)
            theta_hat = adaptive_fit(x, cell.p, spec.M, KGrid.up_to(kmax), config).theta_hat
        elif cell.scenario == "unknown-p":
            result, _ = fit_unknown_p(x, spec, config, exact=exact)
            theta_hat, objective = result.theta_hat, result.objective
        else:
            result = fit_observed(x, cell.p, spec, config, exact=exact)
            theta_hat, objective = result.theta_hat, result.objective
        r = theta_hat - theta
        loss = float(np.vdot(r, r))

    return TrialRecord(
        scenario=cell.scenario,
        n1=n,
        n2=n,
        k1=k,
        k2=k,
        p=p,
        sigma=sigma,
        rho=rho,
        M=M,
        mode=cell.mode,
        seed=seed,
        loss=loss,
        scaled_loss=scaled_loss(loss, p, n, n, k, k, cell.symmetric),
        objective=objective,
        seconds=time.perf_counter() - start if timing else None,
        trial=trial,
        zero_loss=float(np.vdot(theta, theta)),
    )


def _run_task(task):
    cell, seed, config, timing, trial = task
    return run_trial(cell, seed, config, timing, trial)


def run_sweep(config: SweepConfig, workers=1, timing=False):
    """All records of ``config`` in cell-major, then trial, order."""
    tasks = [
        (cell, cell.trial_seed(config.base_seed, t), config.fit, timing, t)
        for cell in config.cells()
        for t in range(config.trials)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


def _cell_key(r):
    return (r.scenario, r.n1, r.n2, r.k1, r.k2, r.p, r.sigma, r.rho, r.M, r.mode)


_KEY_NAMES = ("scenario", "n1", "n2", "k1", "k2", "p", "sigma", "rho", "M", "mode")


def rate_report(records):
    """Summarize records per cell.

    Returns a dict with

    * ``cells``: median and upper quartile of ``loss`` and ``scaled_loss``
      for every cell, plus the median zero-estimator loss;
    * ``p_ratios``: for cells that differ only in ``p``, the ratio of the
      median loss at ``p`` to the median loss at the largest ``p``, next to
      the ratio ``p_ref / p`` the 1/p scaling predicts;
    * ``sparse_sbm``: for ``sbm`` cells, least-squares versus zero-estimator
      median loss.
    """
    records = list(records)
    if not records:
        raise ValueError("rate_report needs at least one record")
    groups = {}
    for r in records:
        groups.setdefault(_cell_key(r), []).append(r)

    cells = []
    medians = {}
    for key, rs in groups.items():
        loss = np.array([r.loss for r in rs])
        scaled = np.array([r.scaled_loss for r in rs])
        zero = np.array([r.zero_loss for r in rs])
        med = float(np.median(loss))
        medians[key] = med
        cells.append(
            dict(
                zip(_KEY_NAMES, key),
                trials=len(rs),
                loss_median=med,
                loss_q75=float(np.quantile(loss, 0.75)),
                scaled_loss_median=float(np.median(scaled)),
                scaled_loss_q75=float(np.quantile(scaled, 0.75)),
                zero_loss_median=float(np.median(zero)),
            )
        )

    families = {}
    for key in groups:
        fam = key[:5] + key[6:]
        families.setdefault(fam, []).append(key[5])
    p_ratios = []
    for fam, ps in families.items():
        if len(ps) < 2:
            continue
        p_ref = max(ps)
        ref = medians[fam[:5] + (p_ref,) + fam[5:]]
        for p in sorted(ps, reverse=True)[1:]:
            med = medians[fam[:5] + (p,) + fam[5:]]
            p_ratios.append(
                dict(
                    zip(_KEY_NAMES[:5] + _KEY_NAMES[6:], fam),
                    p_ref=p_ref,
                    p=p,
                    ratio=med / ref if ref > 0 else math.inf,
                    theory=p_ref / p,
                )
            )

    sparse = [
        dict(
            zip(_KEY_NAMES, (c[name] for name in _KEY_NAMES)),
            ls_loss_median=c["loss_median"],
            zero_loss_median=c["zero_loss_median"],
            zero_not_worse=c["zero_loss_median"] <= c["loss_median"],
            rate_threshold=rate_denominator(c["n1"], c["n2"], c["k1"], c["k2"], True) / (c["p"] * c["n1"] ** 2),
        )
        for c in cells
        if c["scenario"] == "sbm"
    ]
    return {"cells": cells, "p_ratios": p_ratios, "sparse_sbm": sparse}
