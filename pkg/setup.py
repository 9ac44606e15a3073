from setuptools import setup, find_packages

setup(name='gaussian_igc',
      version='0.1.0',
      description='Information geometric complexity of correlated Gaussian models',
      packages=find_packages(exclude=['tests', 'tests.*']),
      python_requires='>=3.8',
      install_requires=['numpy>=1.20', 'scipy>=1.6'],
      extras_require={'test': ['pytest>=6', 'hypothesis>=6']},
      entry_points={'console_scripts': ['gaussian-igc=gaussian_igc.cli:main']},
     )
