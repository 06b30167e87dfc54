import pytest

from gcmbounds import _core_py, interp, specfun

try:
    from gcmbounds import _core
except ImportError:
    _core = None

BACKENDS = [_core_py] + ([_core] if _core is not None else [])

_ACCEPTANCE = []


def record_acceptance(number, passed, detail):
    _ACCEPTANCE.append((number, bool(passed), detail))


@pytest.fixture(params=BACKENDS, ids=lambda m: m.BACKEND)
def backend(request, monkeypatch):
    """Route specfun and interp through one kernel module for the test."""
    mod = request.param
    monkeypatch.setattr(specfun, "bessel_pair", mod.bessel_pair)
    monkeypatch.setattr(interp, "hermite_coeffs", mod.hermite_coeffs)
    monkeypatch.setattr(interp, "horner_eval", mod.horner_eval)
    specfun._ZERO_CACHE.clear()
    yield mod
    specfun._ZERO_CACHE.clear()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")

