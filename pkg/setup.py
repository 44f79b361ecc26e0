from setuptools import setup

setup(
    name='kfoldpi',
    version='0.1.0',
    packages=['kfoldpi',
              'kfoldpi.data',
              'kfoldpi.data.utils',
              'kfoldpi.inference',
              'kfoldpi.inference.utils'],
    entry_points={'console_scripts': ['kfoldpi=kfoldpi.cli:main']},
    python_requires='>=3.9.0'
)
