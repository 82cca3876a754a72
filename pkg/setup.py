from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pldisk._kernel._rk",
                sources=["src/pldisk/_kernel/_rk.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython: install pure-Python only, the kernel falls back at import.
    ext_modules = []

setup(ext_modules=ext_modules)
