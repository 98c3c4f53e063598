# This file makes Python treat the directory 'torus_coulomb' as a package.
__version__ = "0.1.0"
