from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("sociallearn._speedups", ["src/sociallearn/_speedups.pyx"]),
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
