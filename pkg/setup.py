import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

# No -ffast-math and no -march=native: the compiled kernels must produce
# bit-identical results to the numpy backend, so IEEE semantics stay intact.
extensions = [
    Extension(
        "slicenormals._kernels_cy",
        ["src/slicenormals/_kernels_cy.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
