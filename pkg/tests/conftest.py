import pytest
from hypothesis import HealthCheck, settings

from twistbeam.beamcore import ModeSpec

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

W0 = 1e-4


def make_mode(n=0, l=0, kw0=100.0, w0=W0, **kw):
    return ModeSpec(n, l, kw0 / w0, w0, **kw)


@pytest.fixture
def gauss():
    return make_mode()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for res in sorted(results, key=lambda r: int(r.key)):
            terminalreporter.write_line(res.line())
