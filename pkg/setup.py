import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off: forbid FMA contraction so the compiled kernels are
# bit-identical to the pure-Python fallback (same IEEE-754 operation order).
ext = Extension(
    "cbf_teleop._kernels._core",
    ["src/cbf_teleop/_kernels/_core.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
