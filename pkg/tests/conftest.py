import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_hermitian(rng, d, scale=1.0):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * 0.5 * (x + x.conj().T)


def random_density(rng, d):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """``with criterion(k, text):`` records one acceptance line, pass or fail."""
    from contextlib import contextmanager

    @contextmanager
    def record(k, text):
        try:
            yield
        except BaseException:
            _CRITERIA[k] = (False, text)
            print(f"criterion {k}: FAIL  {text}")
            raise
        _CRITERIA[k] = (True, text)
        print(f"criterion {k}: PASS  {text}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, text = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {text}")
