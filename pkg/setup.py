#!/usr/bin/env python

import pathlib

from setuptools import find_packages, setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

setup(
    name="llpm",
    use_scm_version={
        "write_to": "llpm/_version.py",
        "write_to_template": '__version__ = "{version}"\n',
        "fallback_version": "0.1.0",
    },
    description="Compile typed, latency-insensitive dataflow modules to pipelined Verilog and compose them into systems",
    long_description=README,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["llpm", "llpm.*"]),
    package_data={"llpm": ["templates/*.jinja"]},
    include_package_data=True,
    python_requires=">=3.9",
    setup_requires=["setuptools_scm"],
    install_requires=["marshmallow>=3.13", "pyyaml", "pint", "docopt", "jinja2", "networkx>=2.6"],
    extras_require={"dev": ["rstcheck"]},
    entry_points={"console_scripts": ["llpm=llpm.cli:run_cli"]},
)
