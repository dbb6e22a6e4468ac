import io
import re
from setuptools import setup

with io.open('README.md', 'rt') as f:
    readme = f.read()

with io.open('oscint/__init__.py', 'rt') as f:
    version = re.search(r"__version__ = '(.*?)'", f.read()).group(1)

setup(
    name='oscint',
    version=version,
    description='Decay laws of trilinear oscillatory integrals of convolution type, checked numerically.',
    long_description=readme,
    long_description_content_type='text/markdown',
    license='MIT',
    platforms='any',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Operating System :: OS Independent',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    packages=['oscint'],
    python_requires='>=3.7',
    install_requires=['numpy>=1.17', 'scipy>=1.4', 'sympy>=1.5', 'pymongo>=3.7'],
    extras_require={'dev': ['pytest', 'hypothesis']},
    entry_points={'console_scripts': ['oscint=oscint.cli:main']},
)
