"""Builds the optional compiled kernel extension.

The package works without it: debiaslab.kernels falls back to the
numpy reference implementation when the extension is missing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("debiaslab._ckernels", ["src/debiaslab/_ckernels.pyx"])],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
