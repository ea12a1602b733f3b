"""Build shim: compiles the optional fast-loop extension when Cython is present.

The package is fully functional without the extension (a pure-Python twin of
the kernels is selected at import time), so a missing Cython or C compiler
must not break installation.
"""

import sys

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension
except ImportError:
    setup()
    sys.exit(0)

extensions = [
    Extension("sympint._fastloops", ["src/sympint/_fastloops.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level="3"))
