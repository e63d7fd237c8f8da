"""Build hook for the optional compiled protocol loop.

The package works without the extension; bellsim._kernels falls back to the
numpy implementation when the import fails.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "bellsim._kernels.cyloop",
        ["src/bellsim/_kernels/cyloop.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3") if cythonize else [])
