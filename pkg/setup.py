# Builds the optional compiled kernel extension. The package falls back to
# the pure-Python kernels in regenboot.kernels._pykernels when the extension
# is unavailable, so a failed compile is not fatal to using the library.
#
#   python setup.py build_ext --inplace      # dev build of the extension

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "regenboot.kernels._ckernels",
                sources=["src/regenboot/kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: forbid FMA contraction so the compiled
                # kernels are bit-identical to the pure-Python fallback.
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
