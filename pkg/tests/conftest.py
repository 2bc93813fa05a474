import math

import pytest

import scalekernel as sk


@pytest.fixture(scope="session")
def bm():
    return sk.make_diffusion("bm", (0.0, 1.0))


@pytest.fixture(scope="session")
def ou():
    return sk.make_diffusion("ou", (1.0,))


@pytest.fixture(scope="session")
def shiryaev():
    return sk.make_diffusion("shiryaev", (1.0, 0.5))


@pytest.fixture(scope="session")
def bm_kernel(bm):
    return sk.kernel_for(bm, 0.5)


@pytest.fixture(scope="session")
def ou_kernel(ou):
    return sk.kernel_for(ou, 0.5)


@pytest.fixture(scope="session")
def shiryaev_kernel(shiryaev):
    return sk.kernel_for(shiryaev, 0.5)


@pytest.fixture(scope="session")
def kernels(bm_kernel, ou_kernel, shiryaev_kernel):
    return {"bm": bm_kernel, "ou": ou_kernel, "shiryaev": shiryaev_kernel}


BM_GOLDEN = -0.2 * math.cosh(0.5) / math.sinh(1.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
