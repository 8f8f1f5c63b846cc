"""Build the compiled chain-sampler kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and selects the numpy fallback at import time.
Set QCOLLIDE_PURE_PYTHON=1 to skip the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("QCOLLIDE_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("qcollide._chain", ["src/qcollide/_chain.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
