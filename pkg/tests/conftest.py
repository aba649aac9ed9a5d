import pathlib
import sys

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from cohlen import _backend  # noqa: E402

GOLDEN = pathlib.Path(__file__).parent / "golden"


def _available_backends():
    names = ["numpy"]
    try:
        _backend.load("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


BACKENDS = _available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return _backend.load(request.param)


@pytest.fixture
def golden_dir():
    return GOLDEN


def oracle_arrays(fld):
    lengths = np.array([[[c[0] for c in cell] for cell in line] for line in fld], dtype=np.uint16)
    censored = np.array([[[c[1] for c in cell] for cell in line] for line in fld], dtype=bool)
    return lengths, censored


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
