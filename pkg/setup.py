from setuptools import setup, find_packages

setup(
    name="qubus",
    packages=find_packages(exclude=["tests"]),
    install_requires=["numpy", "scipy", "pre-commit", "pandas", "pyyaml"],
    extras_require={"test": ["pytest"]},
)
