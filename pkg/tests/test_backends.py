import os
import subprocess
import sys

import numpy as np
import pytest

from cohlen import _backend, synth
from cohlen.rays import DirectionSet, coherence_field

from conftest import BACKENDS

needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


@needs_ext
@pytest.mark.parametrize("seed, order, threads", [(0, 0, 1), (1, 2, 4), (2, 3, 2), (3, 4, 1)])
def test_backends_agree(seed, order, threads):
    img = synth.generate(synth.TextureSpec("noise", 72, seed=seed, noise_std=30))
    dirs = DirectionSet()
    a = coherence_field(img, dirs, 0.3, 18, order, threads, backend=_backend.load("cython"))
    b = coherence_field(img, dirs, 0.3, 18, order, threads, backend=_backend.load("numpy"))
    assert a == b
    assert np.array_equal(a.lengthsK, b.lengthsK) if order else a.lengthsK is None


@needs_ext
def test_backends_agree_on_stripes():
    img = synth.generate(synth.TextureSpec("stripes", 64, period=5, orientation="horizontal"))
    fields = [coherence_field(img, DirectionSet(16), 0.5, 12, backend=_backend.load(n)) for n in BACKENDS]
    assert fields[0] == fields[-1]


def _selected(env):
    code = "import cohlen; print(cohlen.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env={**os.environ, **env},
                         capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_forces_fallback():
    assert _selected({"COHLEN_BACKEND": "numpy"}) == "numpy"


@needs_ext
def test_default_prefers_extension():
    env = {k: v for k, v in os.environ.items() if k != "COHLEN_BACKEND"}
    out = subprocess.run([sys.executable, "-c", "import cohlen; print(cohlen.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "cython"


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        _backend.load("fortran")
