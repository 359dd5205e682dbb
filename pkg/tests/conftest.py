import numpy as np
import pytest

from gbsvr import _backend
from gbsvr.kernel import KernelSpec, gram
from gbsvr.solver import DualProblem


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run a test once per available kernel backend."""
    previous = _backend.active()
    _backend.use(request.param)
    yield request.param
    _backend.use(previous)


def random_problem(rng, n, l=2, kind="linear", eps=0.1, C=1.0, r_max=0.3):
    centers = rng.uniform(-1, 1, (n, l))
    G = gram(KernelSpec(kind, 0.7), centers)
    return DualProblem(G, rng.uniform(0, r_max, n), rng.uniform(-1, 1, n), eps, C)


# -- acceptance reporting ---------------------------------------------------
# Tests marked ``criterion(k)`` are tallied here and summarized as one
# PASS/FAIL line per criterion at the end of the run.

_criteria: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.outcome == "passed"):
        return
    details = [v for k, v in item.user_properties if k == "measured"]
    _criteria.setdefault(mark.args[0], []).append((item.name, rep.outcome, details))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_criteria):
        runs = _criteria[k]
        outcomes = {o for _, o, _ in runs}
        if "failed" in outcomes:
            verdict = "FAIL"
        elif "passed" in outcomes:
            verdict = "PASS"
        else:
            verdict = "SKIP"
        notes = [d for _, _, ds in runs for d in ds]
        passed = sum(o == "passed" for _, o, _ in runs)
        notes.append(f"{passed}/{len(runs)} tests passed")
        notes += [f"{n} {o}" for n, o, _ in runs if o != "passed"]
        tr.write_line(f"criterion {k}: {verdict}  " + "; ".join(notes))
