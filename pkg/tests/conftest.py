import numpy as np
import pytest

from sketchycore.matcore import RandomStream, thin_qr

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    number, title = marker.args
    detail = "; ".join(f"{k}={v}" for k, v in rep.user_properties)
    _CRITERIA[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}  {detail}")


def exact_rank(M, N, r, seed=0, spectrum=None):
    """``U diag(sigma) V^T`` with Haar factors; sigma defaults to 1..r descending."""
    root = RandomStream(seed, 99)
    U, _ = thin_qr(root.child(0).generator().standard_normal((M, r)))
    V, _ = thin_qr(root.child(1).generator().standard_normal((N, r)))
    sigma = np.arange(r, 0, -1, dtype=float) if spectrum is None else np.asarray(spectrum, float)
    return (U * sigma) @ V.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
