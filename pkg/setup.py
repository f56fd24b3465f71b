"""Build script: compiles the optional peeling-kernel extension.

The package works without the extension (a pure-Python kernel is selected
at import time), so any build failure here is non-fatal by design: just
re-run with SPARDA_SKIP_EXT=1 to install the pure-Python variant.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SPARDA_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/sparda/_peel_core.pyx"],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"warning: skipping compiled peeling kernel ({exc})")

setup(ext_modules=ext_modules)
