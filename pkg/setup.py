"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any failure to cythonize or compile is reported
as a warning and the build continues as pure Python.
"""

import warnings

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "chernoff._accel._fastkern",
                ["src/chernoff/_accel/_fastkern.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build environment
    warnings.warn(f"accelerator extension skipped ({exc}); using pure-Python backend")
    extensions = []

setup(ext_modules=extensions)
