import os

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("EVLINE_BUILD_JOBS", default=os.cpu_count() or 2).install()

core_sources = [
    "src/io.cpp",
    "src/undistort.cpp",
    "src/pose.cpp",
    "src/hough.cpp",
    "src/tracker.cpp",
    "src/triangulate.cpp",
    "src/sim.cpp",
    "src/pipeline.cpp",
    "src/bench.cpp",
    "src/svg.cpp",
]

setup(
    ext_modules=[
        Pybind11Extension(
            "evline._evline",
            sources=["python/bindings.cpp"] + core_sources,
            include_dirs=["include", "/usr/include/eigen3"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
