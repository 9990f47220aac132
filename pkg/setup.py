"""Build hook for the optional compiled kernels.

Without Cython or a working compiler the package installs pure Python and
``spanq.kernels`` falls back to the numpy implementation.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("SPANQ_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("spanq._fejer", ["src/spanq/_fejer.pyx"], include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
