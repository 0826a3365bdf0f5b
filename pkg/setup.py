"""
Setup script for kummerpearson
"""

from setuptools import setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="kummerpearson",
    version="1.0.0",
    author="kummerpearson developers",
    description="Hypergeometric series of matrix argument, Kummer-Pearson VII relations and configuration densities",
    long_description=long_description,
    long_description_content_type="text/markdown",
    py_modules=[
        "config",
        "errors",
        "models",
        "signed_log",
        "partition_core",
        "zonal_poly",
        "matrix_hypergeom",
        "symmetric_eigen",
        "kummer_relations",
        "shape_configuration",
        "landmark_io",
        "pearson_inference",
        "main",
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={"test": ["pytest>=7.4.0"]},
    entry_points={
        "console_scripts": [
            "kummerpearson=main:main",
        ],
    },
)
