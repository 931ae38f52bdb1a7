"""Optional Cython extension build.

The package works without the extension (a pure-Python kernel backend is
selected at import time), so any compilation failure degrades to a warning
instead of breaking the install.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/lisform/kernels/_fast.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"Cython extension skipped ({exc}); using pure-Python kernels")

setup(ext_modules=ext_modules)
