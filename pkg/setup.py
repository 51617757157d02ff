"""Build script.

The compiled band-convolution kernel is optional: when Cython and a C
compiler are available the extension is built, otherwise the package
falls back to the pure-numpy implementation at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "phasewave._bandconv",
                ["src/phasewave/_bandconv.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
