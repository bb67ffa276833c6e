import os

import numpy as np
from setuptools import Extension, setup

# CAMROUTE_NO_EXT=1 skips the compiled core; the package then runs on the pure-Python kernels.
ext_modules = []
if not os.environ.get("CAMROUTE_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "camroute._ckernels",
                ["src/camroute/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
