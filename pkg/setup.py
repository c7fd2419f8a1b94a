"""Build script: compiles the optional Cython kernel extension.

Set KPRL_NO_EXT=1 to skip the extension entirely; the package then runs on
the pure-numpy fallback selected at import time.
"""

import os

from setuptools import setup

# -fno-math-errno keeps IEEE-exact results but lets the compiler vectorize
# the sqrt in the RMSProp loops (errno bookkeeping otherwise blocks it).
compile_args = ["-O3", "-funroll-loops", "-fno-math-errno"]
if os.environ.get("KPRL_PORTABLE") != "1":
    compile_args.append("-march=native")

ext_modules = []
if os.environ.get("KPRL_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "kprl._kernels",
                    ["src/kprl/_kernels.pyx", "src/kprl/_corelib.c"],
                    include_dirs=["src/kprl", numpy.get_include()],
                    extra_compile_args=compile_args,
                    depends=["src/kprl/_corelib.h"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
