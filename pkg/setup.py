import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cimbram.engine._core",
                ["src/cimbram/engine/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython available: install pure-Python only, the engine package
    # falls back to the numpy implementation at import time.
    extensions = []

setup(ext_modules=extensions)
