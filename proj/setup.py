import os
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    """Drives the CMake build and copies the extension into the wheel."""

    def build_extension(self, ext):
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        import pybind11

        cfg = "Release"
        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={cfg}",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
            f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
            "-DZQL_BUILD_TESTS=OFF",
            "-DZQL_BUILD_CLI=OFF",
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={out_dir}",
        ]
        source_dir = Path(__file__).parent.resolve()
        subprocess.check_call(["cmake", "-S", str(source_dir), "-B", str(build_dir)] + cmake_args)
        subprocess.check_call(
            ["cmake", "--build", str(build_dir), "--target", "_zqlengine",
             "-j", str(os.cpu_count() or 2)]
        )


setup(
    ext_modules=[CMakeExtension("_zqlengine")],
    cmdclass={"build_ext": CMakeBuild},
)
