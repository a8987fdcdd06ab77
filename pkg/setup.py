"""Build script for the optional compiled simulation kernels.

The package works without the extension (a pure-Python fallback is selected
at import time); building it just makes rollouts much faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "restune.kernels._ballcore",
        ["src/restune/kernels/_ballcore.pyx"],
        # -ffp-contract=off keeps the compiled kernel bit-identical to the
        # pure-Python fallback (no fused multiply-add reassociation).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
