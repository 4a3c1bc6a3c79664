from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernels are a speed layer only: twistdist.kernels falls back
# to the pure NumPy implementation when this extension is absent.
extensions = [
    Extension(
        "twistdist._kernels_cy",
        ["src/twistdist/_kernels_cy.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
