"""
oH surface lab: periods, loci and meshes of the orthorhombic H-surface family.
"""

__version__ = '0.1.0'
