"""Spin spherical harmonics and angular-channel bases.

Channels are indexed by the nonzero integer kappa; the orbital indices of the
two coupled components are l(kappa) and l(-kappa).  Half-integer magnetic
labels m are passed as odd integers m2 = 2m.  The phase convention is fixed
by the identity (sigma . xi) Omega_{kappa,m}(xi) = -Omega_{-kappa,m}(xi).
"""

from __future__ import annotations

import numpy as np
from scipy.special import sph_harm_y

__all__ = ["orbital_l", "degeneracy", "spin_spherical_harmonic", "channel_spinors", "m2_values"]


def orbital_l(kappa: int) -> int:
    """Orbital angular momentum of the upper component for channel kappa."""
    if kappa == 0:
        raise ValueError("kappa must be a nonzero integer")
    return kappa if kappa > 0 else -kappa - 1


def degeneracy(kappa: int) -> int:
    return 2 * abs(kappa)


def m2_values(kappa: int):
    """Odd integers 2m with |m| <= |kappa| - 1/2."""
    j2 = 2 * abs(kappa) - 1
    return list(range(-j2, j2 + 1, 2))


def _ylm(l: int, m: int, xyz: np.ndarray) -> np.ndarray:
    if abs(m) > l:
        return np.zeros(xyz.shape[:-1], dtype=complex)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    theta = np.arccos(np.clip(z / np.linalg.norm(xyz, axis=-1), -1.0, 1.0))
    phi = np.arctan2(y, x)
    return sph_harm_y(l, m, theta, phi)


def spin_spherical_harmonic(kappa: int, m2: int, xyz) -> np.ndarray:
    """Two-spinor Omega_{kappa, m2/2} evaluated at unit vectors xyz (..., 3)."""
    if m2 % 2 == 0 or abs(m2) > 2 * abs(kappa) - 1:
        raise ValueError(f"m2 must be odd with |m2| <= 2|kappa|-1, got {m2}")
    xyz = np.asarray(xyz, dtype=float)
    l = orbital_l(kappa)
    m_dn, m_up = (m2 - 1) // 2, (m2 + 1) // 2
    out = np.zeros(xyz.shape[:-1] + (2,), dtype=complex)
    if kappa < 0:
        cu = np.sqrt((2 * l + 1 + m2) / (2 * (2 * l + 1)))
        cd = np.sqrt((2 * l + 1 - m2) / (2 * (2 * l + 1)))
        out[..., 0] = cu * _ylm(l, m_dn, xyz)
        out[..., 1] = cd * _ylm(l, m_up, xyz)
    else:
        cu = np.sqrt((2 * l + 1 - m2) / (2 * (2 * l + 1)))
        cd = np.sqrt((2 * l + 1 + m2) / (2 * (2 * l + 1)))
        out[..., 0] = -cu * _ylm(l, m_dn, xyz)
        out[..., 1] = cd * _ylm(l, m_up, xyz)
    return out


def channel_spinors(kappa: int, m2: int, xyz) -> tuple:
    """The 4-spinor channel pair (e1, e2) at unit vectors xyz.

    e1 = (Omega_{kappa,m}, 0) and e2 = (0, i Omega_{-kappa,m}); a surface
    density expanded as a*e1 + b*e2 reduces the shell operators to 2x2 blocks.
    """
    om = spin_spherical_harmonic(kappa, m2, xyz)
    om_bar = spin_spherical_harmonic(-kappa, m2, xyz)
    shape = om.shape[:-1] + (4,)
    e1 = np.zeros(shape, dtype=complex)
    e2 = np.zeros(shape, dtype=complex)
    e1[..., :2] = om
    e2[..., 2:] = 1j * om_bar
    return e1, e2
