"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension (a pure numpy
implementation of every kernel is selected at import time), so a missing
compiler or Cython must not break installation.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            "warning: accelerator extension not built (%s); "
            "falling back to the pure Python kernels\n" % (exc,)
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        sys.stderr.write("warning: Cython unavailable, skipping extension\n")
        return []
    from setuptools import Extension

    ext = Extension(
        "intrans._accel._core",
        sources=["src/intrans/_accel/_core.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
