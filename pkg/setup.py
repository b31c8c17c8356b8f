"""Build script: compiles the optional Cython core.

The package is fully functional without the compiled extension (a pure
Python twin is selected at import time), so any failure here is silenced
and the build proceeds extension-free.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "conespec._core",
                ["src/conespec/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"conespec: building without compiled core ({exc})")

setup(ext_modules=ext_modules)
