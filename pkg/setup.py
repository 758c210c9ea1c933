"""Build hook for the optional Cython kernels.

The package works without them: ``mkclab._kernels`` falls back to numpy
implementations when the extension is missing.
"""
import os
import warnings

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("MKCLAB_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython/numpy unavailable; installing pure-Python kernels only")
        return []
    ext = Extension(
        "mkclab._kernels._ckernels",
        sources=["src/mkclab/_kernels/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
