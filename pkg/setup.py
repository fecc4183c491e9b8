from setuptools import setup, find_packages

setup(
    name="groupoid-avg",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy",
        "scipy",
        "python-dotenv"
    ],
    extras_require={
        "test": ["pytest", "hypothesis"]
    },
    entry_points={
        "console_scripts": [
            "groupoid-avg=groupoid_avg.cli.main:main"
        ]
    },
)
