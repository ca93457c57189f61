import os

from setuptools import setup
from setuptools.extension import Extension

# The compiled kernel is optional: without Cython (or with
# BINSTRETCH_PURE_PYTHON=1) the package installs and runs on its
# pure-Python fallback.
ext_modules = []
if not os.environ.get("BINSTRETCH_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("binstretch._kernel", ["src/binstretch/_kernel.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
