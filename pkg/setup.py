import os
import sys

import numpy as np
from setuptools import Extension, setup

# Set COHLEN_NO_EXT=1 to install the pure-Python fallback only.
ext_modules = []
if not os.environ.get("COHLEN_NO_EXT"):
    from Cython.Build import cythonize

    if sys.platform == "win32":
        omp_compile, omp_link = ["/openmp"], []
    elif sys.platform == "darwin":
        omp_compile, omp_link = [], []
    else:
        omp_compile, omp_link = ["-fopenmp"], ["-fopenmp"]

    ext = Extension(
        "cohlen._kernels",
        ["src/cohlen/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # no FMA contraction: results must match the fallback bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off"] + omp_compile
        if sys.platform != "win32" else omp_compile,
        extra_link_args=omp_link,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
