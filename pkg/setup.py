from setuptools import setup, find_packages

with open("README.md", "r") as fh:
    long_description = fh.read()


setup(
    name="rankguard",
    version="0.1.0",
    author="RankGuard developers",
    description="Exact leakage certificates for polar codes with published coordinates",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=["fsspec", "typeguard>=4", "numpy>=1.22"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["rankguard=rankguard.cli:run"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
)
