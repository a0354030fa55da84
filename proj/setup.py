import glob
import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup


def eigen_include():
    for cand in ("/usr/include/eigen3", "/usr/local/include/eigen3"):
        if os.path.isdir(cand):
            return cand
    raise RuntimeError("Eigen3 headers not found")


ext = Pybind11Extension(
    "gasgiant._core",
    sources=sorted(glob.glob("src/*.cpp")) + ["src/bindings/module.cpp"],
    include_dirs=["include", "vendor", eigen_include()],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
