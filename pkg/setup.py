"""Build script for the optional compiled core.

The package works without the extension: ``charkern._backend`` falls back to
the NumPy implementation in ``charkern._core_py`` when ``charkern._core``
cannot be imported.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CHARKERN_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "charkern._core",
                    ["src/charkern/_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
