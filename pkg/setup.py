from setuptools import find_packages
from setuptools import setup

setup(
    name="spectral-torus",
    version="0.1.0",
    description="Spectral Galerkin solvers, bifurcation and center-manifold tools for nonlinear elliptic equations on tori",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.26",
        "scipy>=1.12",
        "sympy>=1.12",
        "matplotlib>=3.8",
        "pandas>=2.1",
        "pydantic>=2.8",
        "pydantic-settings>=2.3",
        "tqdm~=4.66",
    ],
    extras_require={
        "tests": ["pytest", "pytest-mock", "pre-commit"],
    },
    entry_points={
        "console_scripts": ["spectral-torus=spectral_torus.harness.cli:main"],
    },
    classifiers=[
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
