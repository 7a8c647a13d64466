import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; anisomesh.kernels falls back
# to the pure-Python implementation when the extension is absent.
ext_modules = []
if os.environ.get("ANISOMESH_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "anisomesh._kernels",
                    ["src/anisomesh/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
