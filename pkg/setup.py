from setuptools import setup, find_packages
from os import path

here = path.abspath(path.dirname(__file__))
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='fastpaxos',  # Required
    version='0.1.0',  # Required
    description='Fast Paxos laboratory: quorum sizing, coordinator rules and a deterministic fault-injecting simulator.',
    long_description=long_description,
    long_description_content_type='text/markdown',  # Optional (see note above)
    install_requires=["numpy", "netCDF4", "PyYAML"],
    extras_require={"test": ["pytest"]},
    packages=find_packages(exclude=['examples', 'doc', 'misc', 'tests']),
    package_data={'fastpaxos.data': ['scenarios/*.scn', 'scenarios/*.md']},
    entry_points={
        'console_scripts': ['fastpaxos=fastpaxos.cli:main'],
    },
    python_requires='>=3.8',
)
