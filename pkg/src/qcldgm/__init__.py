"""psi-unitary sparse circulant matrices over GF(2) and the quasi-cyclic
LDGM codes built from them."""

__version__ = "0.1.0"

from qcldgm._backend import name as backend  # noqa: E402
from qcldgm.gf2_poly import NotInvertible, SparsePoly, euclid_inverse, parse  # noqa: E402

__all__ = ["SparsePoly", "NotInvertible", "euclid_inverse", "parse", "backend", "__version__"]
