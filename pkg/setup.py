import os

from setuptools import Extension, setup

# PAIRSOURCE_NO_EXT=1 installs the pure-Python package only.
ext_modules = []
if not os.environ.get("PAIRSOURCE_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "pairsource._ckernels",
                    ["src/pairsource/_ckernels.pyx"],
                    libraries=["gmp"],
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
