import sys

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()
packages = setuptools.find_namespace_packages(include=["stacklab*"])
print("PACKAGES FOUND:", packages)
print(sys.version_info)

setuptools.setup(
    name="stacklab",
    version="0.0.1",
    description="Exact cutting-and-stacking: columns, push-forwards of levels and product witnesses",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=packages,
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=[
        "simple-parsing==0.0.20",
        "hydra-core>=1.2",
        "omegaconf>=2.2",
        "tqdm",
        "rich",
        "matplotlib",
        "pandas",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    entry_points={
        "console_scripts": ["stacklab=stacklab.cli:main"],
    },
)
