import pytest

from masseur import _kernels_py, kernels

try:
    from masseur import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python"),
            pytest.param(_kernels_c, id="cython",
                         marks=pytest.mark.skipif(_kernels_c is None, reason="extension not built"))]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the simulator on one specific kernel backend."""
    mod = request.param
    monkeypatch.setattr(kernels, "force_loop", mod.force_loop)
    monkeypatch.setattr(kernels, "admittance_rollout", mod.admittance_rollout)
    return mod


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS, key=lambda s: s.split("  ", 1)[1]):
        terminalreporter.write_line(line)
