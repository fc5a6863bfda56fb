import pathlib
from setuptools import setup, find_packages
# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

packages = find_packages(exclude=["tests"])
# This call to setup() does all the work
setup(
    name="heiscount",
    version="1.0.0",
    description="Exact orbit counting and equidistribution experiments for Picard groups in the Heisenberg group "
                "and complex hyperbolic space",
    long_description=README,
    long_description_content_type="text/markdown",
    license="BSD",
    classifiers=[
        "License :: OSI Approved :: BSD License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    packages=packages,
    include_package_data=True,
    install_requires=["numpy", "pyyaml", "scipy", "joblib", "jax", "jaxlib"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["heiscount=heiscount.__main__:main"]},
)
