from setuptools import setup, find_packages
from pathlib import Path

# Read the contents of the README file
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="sslab",
    version="0.1.0",
    description="Numerical lab for markets with short-sale constraints: strict local martingale "
                "deflators, constrained arbitrage on lattices and equilibrium aggregation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="",
    packages=find_packages(exclude=["test", "test.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.0",
        "scikit_learn>=1.5.0",
        "scipy>=1.10.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "sslab=sslab.experiments.cli:main",
        ],
    },
)
