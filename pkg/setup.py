from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # no Cython: install the pure-Python kernels only
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("genperm._kernels", ["src/genperm/_kernels.pyx"],
                   include_dirs=[np.get_include()], optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
