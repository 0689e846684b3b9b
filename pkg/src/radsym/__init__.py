"""radsym: exact symmetry/conservation-law verification and a radial
method-of-lines solver for semilinear wave, Schrodinger and KdV-type
equations with a power nonlinearity in m+1 spatial dimensions.
"""

__version__ = "0.1.0"
