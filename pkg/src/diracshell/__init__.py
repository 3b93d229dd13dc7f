"""Boundary-element solver for Dirac operators with delta-shell interactions.

Computes, for a closed triangulated surface carrying an electrostatic +
Lorentz-scalar shell coupling:

* the discrete spectrum in the gap (-1, 1) via the characteristic boundary
  operator I + B M_z,
* limiting boundary operators on the continuous spectrum, and
* the on-shell scattering matrix on the energy-shell direction space,

validated against an independent spherical partial-wave oracle.
"""

__version__ = "0.1.0"

from .kernels import get_backend

__all__ = ["get_backend", "__version__"]
