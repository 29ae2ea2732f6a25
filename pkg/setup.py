#!/usr/bin/env python3
"""
Setup script for the Torsion Calculator
"""

from setuptools import setup
import pathlib

HERE = pathlib.Path(__file__).parent
README = (HERE / "README.md").read_text()

setup(
    name="torscalc",
    version="0.1.0",
    description="Exact symbolic calculator and identity checker for higher torsion invariants of bundle expressions",
    long_description=README,
    long_description_content_type="text/markdown",
    py_modules=[
        "errors",
        "scalars",
        "chern",
        "bundles",
        "torsion",
        "transfer",
        "verify",
        "script",
        "calc_config",
        "main_interface",
    ],
    include_package_data=True,
    install_requires=[
        "typing-extensions>=4.0.0",
        "colorama>=0.4.4",
    ],
    extras_require={
        "dev": [
            "black>=22.0.0",
            "flake8>=5.0.0",
            "pytest>=7.0.0",
            "hypothesis>=6.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "torscalc=main_interface:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    keywords="torsion characteristic-classes symbolic-algebra topology",
)
