from pathlib import Path

from setuptools import find_packages, setup

requirements = [
    line.strip()
    for line in Path(__file__).with_name('requirements.txt').read_text().splitlines()
    if line.strip() and not line.startswith('#')
]

setup(
    name='ble-proximity-sim',
    version='1.0.0',
    description='Cross-platform BLE proximity detection simulator',
    packages=find_packages(exclude=['tests', 'tests.*']),
    python_requires='>=3.10',
    install_requires=requirements,
    entry_points={
        'console_scripts': ['ble-proximity-sim=ble_proximity_sim.cli:main'],
    },
)
