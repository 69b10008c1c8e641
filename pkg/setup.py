import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the numpy fallback in triad_charts._kernels_py is used
    ext_modules = []
else:
    ext = Extension("triad_charts._kernels", ["src/triad_charts/_kernels.pyx"],
                    include_dirs=[np.get_include()], extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
