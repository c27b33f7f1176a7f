"""Build script for the optional compiled simulation core.

The package is fully functional without the extension (a pure-Python
kernel with identical semantics is selected at import time), so a
missing compiler or Cython only costs speed, not correctness.
"""

from setuptools import Extension, setup

# -ffp-contract=off: the pure-Python kernel and the compiled kernel must
# produce bit-identical floats, so fused multiply-adds are disabled.
COMPILE_ARGS = ["-O3", "-ffp-contract=off", "-fno-fast-math"]

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "beliefplan.sim._core",
                ["src/beliefplan/sim/_core.pyx"],
                extra_compile_args=COMPILE_ARGS,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
