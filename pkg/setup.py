import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernel is an optimization only; crdiscs._kernels falls back to
# the pure-numpy implementation when the extension is absent.
extensions = [
    Extension(
        "crdiscs._kernels._fast",
        ["src/crdiscs/_kernels/_fast.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -fcx-limited-range: naive complex products (numpy semantics), not
        # the __muldc3 library call with inf/nan fixups
        extra_compile_args=["-O3", "-fcx-limited-range"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
