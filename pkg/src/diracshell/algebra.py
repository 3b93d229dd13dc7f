"""Exact 4x4 Dirac algebra, spectral-branch bookkeeping, and closed-form kernels.

Everything in this module is a pure function of its arguments: the Dirac
matrices in the standard representation, the momentum branch k = sqrt(z^2-1)
with its one-sided boundary values on the continuous spectrum, the free-space
Green kernel of the Dirac operator at mass 1, the energy-shell spinor
projectors, and the shell coupling / transmission jump matrices.

Units: hbar = c = m = 1, so the spectral gap is (-1, 1) and the continuous
spectrum is (-inf, -1] u [1, inf).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ALPHA",
    "BETA",
    "ID4",
    "Side",
    "Regime",
    "ThresholdError",
    "DiracAlgebra",
    "SpectralPoint",
    "CouplingMatrix",
    "build_dirac_algebra",
    "momentum_branch",
    "spectral_point",
    "green_kernel",
    "fiber_projector",
    "coupling",
    "jump_matrices",
    "alpha_dot",
    "rotation_matrix",
    "spinor_rotation",
]

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_Z2 = np.zeros((2, 2), dtype=complex)
_I2 = np.eye(2, dtype=complex)

#: Dirac matrices alpha_1, alpha_2, alpha_3 (off-diagonal Pauli blocks).
ALPHA = tuple(np.block([[_Z2, s], [s, _Z2]]) for s in _PAULI)
#: Dirac matrix beta = diag(I2, -I2).
BETA = np.block([[_I2, _Z2], [_Z2, -_I2]])
ID4 = np.eye(4, dtype=complex)

for _m in (*ALPHA, BETA, ID4):
    _m.setflags(write=False)

#: Tolerance below which |z^2 - 1| is treated as sitting on a threshold.
THRESHOLD_TOL = 1e-12
#: Tolerance on eta^2 - tau^2 -/+ 4 for the coupling-regime classification.
REGIME_TOL = 1e-10


class Side(enum.Enum):
    """Boundary side of the spectral parameter relative to the real axis.

    UPPER/LOWER tag the limits from above/below onto the continuous spectrum;
    INTERIOR covers genuinely non-real z and the gap (-1, 1).
    """

    UPPER = "+i0"
    LOWER = "-i0"
    INTERIOR = "interior"


class Regime(enum.Enum):
    NONCRITICAL = "noncritical"
    CONFINEMENT = "confinement"
    CRITICAL = "critical"


class ThresholdError(ValueError):
    """Spectral parameter at (or numerically on) a threshold +-1."""


@dataclass(frozen=True)
class DiracAlgebra:
    """The fixed Dirac matrices: alpha[j] anticommute pairwise and with beta."""

    alpha: tuple
    beta: np.ndarray
    identity: np.ndarray


def build_dirac_algebra() -> DiracAlgebra:
    return DiracAlgebra(alpha=ALPHA, beta=BETA, identity=ID4)


def alpha_dot(v) -> np.ndarray:
    """alpha . v for a 3-vector v (real or complex entries)."""
    return v[0] * ALPHA[0] + v[1] * ALPHA[1] + v[2] * ALPHA[2]


def momentum_branch(z: complex, side: Side = Side.INTERIOR) -> complex:
    """Branch value k with k^2 = z^2 - 1.

    For non-real z and for z in the gap, k is the square root with Im k > 0,
    so that exp(ik|x|) decays.  On the continuous spectrum the one-sided
    limits are the continuous extensions of that branch:

        k(lambda, UPPER) = sign(lambda) * sqrt(lambda^2 - 1)
        k(lambda, LOWER) = -sign(lambda) * sqrt(lambda^2 - 1)

    Raises ThresholdError at z = +-1 (excluded everywhere).
    """
    z = complex(z)
    if abs(z * z - 1.0) < THRESHOLD_TOL:
        raise ThresholdError(f"spectral parameter {z} too close to a threshold +-1")
    if side is Side.INTERIOR:
        if z.imag == 0.0 and abs(z.real) >= 1.0:
            raise ValueError(
                f"z={z} lies on the continuous spectrum; pass side=UPPER or LOWER"
            )
        k = np.sqrt(complex(z * z - 1.0))
        if k.imag < 0.0:
            k = -k
        return complex(k)
    lam = z.real
    if z.imag != 0.0 or abs(lam) <= 1.0:
        raise ValueError(f"side tags require real z with |z| > 1, got {z}")
    s = 1.0 if side is Side.UPPER else -1.0
    return complex(np.sign(lam) * s * np.sqrt(lam * lam - 1.0))


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter z with its side tag and branch value k."""

    z: complex
    side: Side
    k: complex

    @property
    def in_gap(self) -> bool:
        return self.z.imag == 0.0 and abs(self.z.real) < 1.0


def spectral_point(z: complex, side: Side = Side.INTERIOR) -> SpectralPoint:
    return SpectralPoint(z=complex(z), side=side, k=momentum_branch(z, side))


def green_kernel(point: SpectralPoint, d) -> np.ndarray:
    """Free Dirac Green kernel phi_z(d), a 4x4 matrix, for d != 0.

    phi_z(d) = e^{ik|d|}/(4 pi |d|) [ z I + beta + (1 - ik|d|) i alpha.d / |d|^2 ]

    obtained by applying (-i alpha.grad + beta + z) to the outgoing Helmholtz
    kernel at energy z^2 - 1.  Away from d = 0 each column is annihilated by
    (-i alpha.grad + beta - z).
    """
    d = np.asarray(d, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise ValueError("green_kernel is singular at d = 0; use surface quadrature")
    z, k = point.z, point.k
    g = np.exp(1j * k * r) / (4.0 * np.pi * r)
    return g * ((z * ID4 + BETA) + (1.0 - 1j * k * r) * 1j * alpha_dot(d) / r**2)


def fiber_projector(lam: float, xi) -> np.ndarray:
    """Energy-shell projector P_lam(xi) = (I + (sqrt(lam^2-1) alpha.xi + beta)/lam)/2.

    Requires |lam| > 1 and |xi| = 1.  P is an orthogonal projector of rank 2
    selecting the spinor polarizations that propagate at energy lam in
    direction xi.
    """
    lam = float(lam)
    if abs(lam) <= 1.0:
        raise ValueError(f"fiber projector needs |lambda| > 1, got {lam}")
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("xi must be a unit vector")
    k0 = np.sqrt(lam * lam - 1.0)
    return 0.5 * (ID4 + (k0 * alpha_dot(xi) + BETA) / lam)


@dataclass(frozen=True)
class CouplingMatrix:
    """Shell coupling B = eta I + tau beta with its regime classification."""

    eta: float
    tau: float
    matrix: np.ndarray
    regime: Regime

    @property
    def is_trivial(self) -> bool:
        return self.eta == 0.0 and self.tau == 0.0


def coupling(eta: float, tau: float) -> CouplingMatrix:
    """Classify (eta, tau) and build B = eta I4 + tau beta.

    The regime is CRITICAL when eta^2 - tau^2 = 4 (rejected by the solvers),
    CONFINEMENT when eta^2 - tau^2 = -4 (impenetrable shell), otherwise
    NONCRITICAL.
    """
    eta, tau = float(eta), float(tau)
    disc = eta * eta - tau * tau
    if abs(disc - 4.0) < REGIME_TOL:
        regime = Regime.CRITICAL
    elif abs(disc + 4.0) < REGIME_TOL:
        regime = Regime.CONFINEMENT
    else:
        regime = Regime.NONCRITICAL
    b = eta * ID4 + tau * BETA
    b.setflags(write=False)
    return CouplingMatrix(eta=eta, tau=tau, matrix=b, regime=regime)


def jump_matrices(coup: CouplingMatrix, nu) -> tuple:
    """Transmission jump matrices (J+, J-) = (i alpha.nu + B/2, i alpha.nu - B/2).

    nu is the unit normal entering the transmission condition
    J+ (exterior trace) = J- (interior trace); on a mesh that normal points
    into the bounded region (see geometry.shell_normals).  In the confinement
    regime both matrices are rank 2, which decouples the two sides of the
    shell.
    """
    nu = np.asarray(nu, dtype=float)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
        raise ValueError("nu must be a unit vector")
    ianu = 1j * alpha_dot(nu)
    half_b = 0.5 * coup.matrix
    return ianu + half_b, ianu - half_b


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """3x3 rotation by `angle` about the unit vector `axis` (Rodrigues)."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    c, s = np.cos(angle), np.sin(angle)
    cross = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return c * np.eye(3) + s * cross + (1 - c) * np.outer(n, n)


def spinor_rotation(axis, angle: float) -> np.ndarray:
    """Spinor representative U(R) = exp(-i angle axis.Sigma / 2), Sigma = diag(sigma, sigma).

    Satisfies U (alpha.d) U^* = alpha.(R d) for R = rotation_matrix(axis, angle)
    and commutes with beta.
    """
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    sdotn = n[0] * _PAULI[0] + n[1] * _PAULI[1] + n[2] * _PAULI[2]
    u2 = np.cos(angle / 2) * _I2 - 1j * np.sin(angle / 2) * sdotn
    return np.block([[u2, _Z2], [_Z2, u2]])
