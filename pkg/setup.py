"""Build script for the compiled message-passing / counting kernels.

The package works without the extension (a pure-Python fallback is selected
at import time), but the compiled core is what makes the large production
runs practical.
"""
import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "adsat._kernels._fast",
        ["src/adsat/_kernels/_fast.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        include_dirs=[numpy.get_include()],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
