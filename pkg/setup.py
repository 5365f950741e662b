import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "fraudwood._ckernels",
        sources=["src/fraudwood/_ckernels.pyx"],
        language="c++",
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # Bit-parity with the numpy fallback requires no FMA contraction.
        extra_compile_args=["-O2", "-ffp-contract=off"],
    ),
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
