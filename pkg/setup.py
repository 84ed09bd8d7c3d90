import numpy as np
from setuptools import Extension, setup

# The compiled step kernel is optional: the package falls back to the numpy
# implementation at import time if the extension is missing.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "diracqca._stepcore",
                ["src/diracqca/_stepcore.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
