#!/usr/bin/env python
from setuptools import setup

# Setup
setup(
    name="polydisc",
    packages=["polydisc"],
    # SCM versioning
    use_scm_version=True,
    setup_requires=["setuptools_scm"],
    # Metadata
    description=(
        "Truncated series, function spaces and cyclicity computations "
        "on the polydisc."
    ),
    license="GPLv3",
    # Classifiers
    classifiers=[
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    # Requirements
    python_requires=">=3.8",
    install_requires=["numpy>=1.17", "scipy>=1.4"],
    extras_require={"tests": ["pytest"]},
    # Entry points
    entry_points={"console_scripts": ["polydisc = polydisc.cli:main"]},
)
