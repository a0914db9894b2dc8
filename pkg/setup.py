import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# libnpyrandom provides the C implementations behind numpy.random.Generator,
# which the rejection-kernel core calls so that the compiled and pure-Python
# backends consume the identical random stream.
npyrandom_dir = os.path.join(np.get_include(), "..", "..", "random", "lib")

ext = Extension(
    "subred._mrkcore",
    ["src/subred/_mrkcore.pyx"],
    include_dirs=[np.get_include()],
    library_dirs=[npyrandom_dir],
    libraries=["npyrandom"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
