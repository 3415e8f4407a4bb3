"""
mhh: trigraded computer algebra for the motivic Hochschild homology of F_p.
"""

__version__ = "0.1.0"
