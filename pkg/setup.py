from setuptools import find_packages, setup

# Runtime requirements.
inst_reqs = [
    "click>=8.2",
    "numpy>=1.26",
    "python-dotenv",
]

extra_reqs = {
    "test": [
        "assertpy",
        "black",
        "flake8",
        "isort",
        "mypy",
        "pytest",
        "pytest-cov",
    ],
    "dev": [
        "assertpy",
        "black",
        "flake8",
        "isort",
        "mypy",
        "pre-commit",
        "pre-commit-hooks",
        "pytest",
    ],
}

setup(
    name="gpi-multinomial",
    version="0.0.1",
    python_requires=">=3.11",
    author="Development Seed",
    packages=find_packages(),
    install_requires=inst_reqs,
    extras_require=extra_reqs,
    entry_points={
        "console_scripts": [
            "gpi=gpi_multinomial.cli:main",
        ],
    },
    include_package_data=True,
)
