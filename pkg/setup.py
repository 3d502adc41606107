from setuptools import find_packages, setup
from distutils.util import convert_path

main_ns = {}
ver_path = convert_path("coverplan/version.py")
with open(ver_path) as ver_file:
    exec(ver_file.read(), main_ns)

setup(
    name="coverplan",
    version=main_ns["__version__"],
    platforms=["Linux", "MacOS", "Windows"],
    packages=find_packages(where=".", exclude=["tests", "docs", "examples", "dist", "build"]),
    package_dir={"": "."},
    python_requires=">=3.9",
    install_requires=["numpy>=1.21", "scipy>=1.7", "shapely>=2.0", "networkx>=2.6", "lz4>=4.3.2", "msgpack>=1.0.5", "drawsvg>=2.0"],
    extras_require={"dev": ["build", "pytest"]},
    entry_points={"console_scripts": ["coverplan = coverplan.cli:main"]},
)

# python setup.py sdist
