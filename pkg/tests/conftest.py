import itertools

import numpy as np
import pytest

from conic_fourier.expansion import SampledFunction


def random_poly(kind, d, degree, seed, homogeneous=False):
    """Random polynomial in ``(x, t)`` with declared degree."""
    rng = np.random.default_rng(seed)
    terms = []
    for exps in itertools.product(range(degree + 1), repeat=d + 1):
        total = sum(exps)
        if total > degree or (homogeneous and total != degree):
            continue
        terms.append((np.array(exps[:d]), exps[d], rng.standard_normal()))

    def ev(X, T):
        return sum(c * np.prod(X**a, axis=1) * T**j for a, j, c in terms)

    return SampledFunction(ev, kind, f"poly{degree}", degree)


@pytest.fixture
def make_poly():
    return random_poly


# ------------------------------------------------------- acceptance reporting

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    if report.when == "call" or report.failed:
        _CRITERIA.setdefault(mark.args[0], []).append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _CRITERIA[n]
        failed = [name for name, ok in results if not ok]
        status = "PASS" if not failed else "FAIL"
        detail = f" ({', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {n}: {status}{detail}")
