from setuptools import find_packages, setup

setup(
    name="structfid",
    version="0.1.0",
    description="Structural-fidelity evaluation of synthetic tabular data",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",  # Chi-square, normal and KS distributions
        "pandas>=2.0.0",  # CSV IO and report tables
        "scikit-learn>=1.3.0",  # Downstream predictors, nearest neighbours
        "networkx>=3.0",  # DAG storage and d-separation
        "django>=4.2",  # Management commands behind the structfid CLI
    ],
    packages=find_packages(include=["structfid", "structfid.*"]),
    entry_points={"console_scripts": ["structfid=structfid.management:main"]},
    zip_safe=False,
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
