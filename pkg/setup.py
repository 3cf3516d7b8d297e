import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math / -march=native: the kernels must stay IEEE-strict so the
# compiled core and the numpy fallback agree to rounding noise.
extensions = [
    Extension(
        "spinctrl.backends._cykernels",
        sources=["src/spinctrl/backends/_cykernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
