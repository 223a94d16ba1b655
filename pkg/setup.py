from pathlib import Path

from setuptools import find_packages, setup

this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="adaptive_cutsel",
    version="0.1.0",
    description="Adaptive cut selection for mixed-integer programming: adversarial instances, Gomory cut rollouts and a graph policy trained with REINFORCE.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    python_requires=">=3.9",
    install_requires=[
        "numpy",
        "pandas",
        "scipy",
        "setuptools",
        "scikit-learn",
        "torch<=2.3.1",
        "joblib",
    ],
    entry_points={
        "console_scripts": [
            "cutsel = adaptive_cutsel.cli:main",
        ]
    },
)
