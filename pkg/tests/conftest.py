import numpy as np
import pytest

from biclust import BlockValueMatrix, ModelSpec, gen_random_model, materialize_theta
from biclust import estimator

# (criterion number, passed, detail) for the acceptance summary
ACCEPTANCE = []
ACCEPTANCE_COUNT = 11
MONOTONE = {"runs": 0, "violations": []}


def record_acceptance(number, passed, detail):
    ACCEPTANCE.append((number, bool(passed), detail))
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def check_history(history):
    """Non-increasing up to float slack relative to the objective's size."""
    bad = [
        (a, b)
        for a, b in zip(history, history[1:])
        if b > a + estimator.MONOTONE_SLACK * max(1.0, abs(a))
    ]
    return not bad, bad


@pytest.fixture(autouse=True, scope="session")
def _audit_alternating_runs():
    """Check the objective history of every alternating restart in the suite."""
    original = estimator._single_restart

    def audited(*args):
        out = original(*args)
        ok, bad = check_history(out[5])
        MONOTONE["runs"] += 1
        if not ok:
            MONOTONE["violations"].append(bad)
            raise AssertionError(f"objective increased: {bad}")
        return out

    estimator._single_restart = audited
    yield
    estimator._single_restart = original


def pytest_terminal_summary(terminalreporter):
    if MONOTONE["runs"]:
        terminalreporter.write_line(
            f"monotonicity audit: {MONOTONE['runs']} alternating runs, {len(MONOTONE['violations'])} violations"
        )
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    seen = {n: (ok, detail) for n, ok, detail in ACCEPTANCE}
    for n in range(1, ACCEPTANCE_COUNT + 1):
        if n in seen:
            ok, detail = seen[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        else:
            terminalreporter.write_line(f"criterion {n}: NOT RUN")


@pytest.fixture
def rng():
    return np.random.default_rng(20161016)


def planted(spec, q, seed=0):
    """Random nonempty labels with the given block values."""
    assignment, _ = gen_random_model(spec, seed)
    qm = BlockValueMatrix(np.asarray(q, dtype=float), spec.M)
    return assignment, qm, materialize_theta(assignment, qm, spec)


@pytest.fixture
def sym_spec():
    return ModelSpec.symmetric_model(8, 2, 1.0)
