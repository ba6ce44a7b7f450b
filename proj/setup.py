import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext_modules = [
    Pybind11Extension(
        "ifmsan._core",
        sorted(glob.glob("src/*.cpp")) + ["bindings/module.cpp"],
        include_dirs=["include", "vendor"],
        cxx_std=20,
    ),
]

setup(ext_modules=ext_modules, cmdclass={"build_ext": build_ext})
