"""Build script: compiles the optional fast kernel extension.

If Cython or a C compiler is unavailable the package installs without the
extension and falls back to the pure-Python kernels at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ipmsim._kernels",
                ["src/ipmsim/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: no FMA contraction, so results track the
                # pure-Python kernels to the last bits.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
