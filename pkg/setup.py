from setuptools import setup, find_packages

setup(
    name="blotto_defense",
    version="0.1.0",
    packages=find_packages(exclude=["examples", "examples.*"]),
    py_modules=["main"],
    install_requires=[
        "duckdb>=1.1.3",
        "pandas>=2.2.3",
        "numpy>=1.26.4",
        "pyarrow>=18.1.0",
        "tqdm>=4.66.6",
    ],
    entry_points={
        "console_scripts": [
            "blotto-defense=main:main",
        ],
    },
    python_requires=">=3.12",
    description="Colonel Blotto CPU allocation game engine and APT defense learning simulator",
    author="Blotto Defense Team",
)
