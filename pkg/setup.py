import numpy
from setuptools import Extension, setup

# The compiled kernel is optional: without Cython (or a working C compiler)
# the package falls back to the numpy implementation selected at import.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "indexbench._kernels",
                ["src/indexbench/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
