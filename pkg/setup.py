"""Build script: compiles the optional fast integrator core.

The package works without the extension (a pure-Python twin is selected at
import time), so any failure here degrades gracefully instead of blocking
the install.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "loxokit._kernel._fastcore",
                ["src/loxokit/_kernel/_fastcore.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"loxokit: skipping compiled core ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
