"""Builds the otmedian_py extension by delegating to cargo.

No maturin or setuptools-rust here: the extension is a plain cdylib, so a
custom build_ext that runs cargo and copies the artifact is all the glue
needed. Install with `pip install -e . --no-build-isolation`.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent
WORKSPACE = CRATE_DIR.parent.parent
ARTIFACTS = [
    "libotmedian_py.so",
    "libotmedian_py.dylib",
    "otmedian_py.dll",
]


class CargoExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            [
                "cargo",
                "build",
                "--release",
                "--package",
                "otmedian-py",
                "--features",
                "extension-module",
            ],
            cwd=WORKSPACE,
            check=True,
        )
        release = WORKSPACE / "target" / "release"
        built = next(p for p in (release / a for a in ARTIFACTS) if p.exists())
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[CargoExtension("otmedian_py")],
    cmdclass={"build_ext": CargoBuildExt},
)
