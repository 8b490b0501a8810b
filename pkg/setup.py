"""Build script: compiles the optional Cython solver kernel.

The compiled kernel is a pure speed-up; if the toolchain is missing the
build still succeeds and the package falls back to the Python kernel.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dialcsp.solver._kernel_cy",
                ["src/dialcsp/solver/_kernel_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
