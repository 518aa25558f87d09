import logging

import numpy as np
import pytest

from qwcomplexity.tensor_core import trace_norm
from qwcomplexity.w1 import audit_results, validate_decomposition

# every W1 result produced anywhere in the session, as (test id, problem)
SOUNDNESS_LOG = {"checked": 0, "failures": []}
ACCEPTANCE_LINES = []


def check_result(A, r):
    problems = []
    rep = validate_decomposition(A, r.decomposition, 1e-8)
    if not rep.accepted:
        problems.append(f"decomposition violation {rep.max_violation:.3e}")
    if not (r.lower <= r.value <= r.upper):
        problems.append(f"bracket {r.lower} <= {r.value} <= {r.upper} fails")
    if A.shape.n == 1:
        err = abs(r.value - 0.5 * trace_norm(A.matrix))
        if err > 1e-10:
            problems.append(f"n=1 value off by {err:.3e}")
    return problems


@pytest.fixture(autouse=True)
def solver_audit(request):
    with audit_results() as results:
        yield results
    for A, r in results:
        SOUNDNESS_LOG["checked"] += 1
        for p in check_result(A, r):
            SOUNDNESS_LOG["failures"].append((request.node.nodeid, p))
    bad = [p for A, r in results for p in check_result(A, r)]
    assert not bad, bad


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _quiet_solver():
    logging.getLogger("qwcomplexity").setLevel(logging.ERROR)
    yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
    terminalreporter.write_line(
        f"solver soundness audit: {SOUNDNESS_LOG['checked']} W1 results checked, "
        f"{len(SOUNDNESS_LOG['failures'])} failures")


def pytest_collection_modifyitems(items):
    # acceptance runs last so its soundness criterion covers the whole session
    items.sort(key=lambda item: item.module.__name__.endswith("test_acceptance"))
