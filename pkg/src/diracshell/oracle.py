"""Independent spherical ground truth: radial channel blocks, gap eigenvalues,
phase shifts, and cavity spectra for the shell operator on a sphere.

On a sphere of radius R every surface operator in this package block-
diagonalizes over the channels (kappa, m).  Expanding a surface density in
channel_spinors and expanding the Green kernel in spherical waves reduces the
mean-trace operator to a 2x2 block per channel built from spherical Bessel
j_l and outgoing Hankel h_l functions evaluated at the branch momentum kR.

With l = orbital_l(kappa), lb = orbital_l(-kappa), x = kR and

    F  = i k R^2 j_l(x)  h_l(x)        Fm = i k^2 R^2 (j_l' h_l + j_l h_l')(x) / 2
    G  = i k R^2 j_lb(x) h_lb(x)       Gm = i k^2 R^2 (j_lb' h_lb + j_lb h_lb')(x) / 2

the channel block of the mean trace of the single-layer potential is

    M_kappa(z) = [[ (1+z) F            , -(Gm + (1-kappa) G / R) ],
                  [ Fm + (1+kappa) F/R , (z-1) G                 ]]

(the radial factor of the single layer is continuous across R while its
derivative jumps by -1; the mean of the one-sided derivatives enters here).
These formulas are cross-validated against the boundary-element operator in
the test-suite before any oracle number is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .algebra import CouplingMatrix, Regime, Side, SpectralPoint, spectral_point
from .spinors import orbital_l

__all__ = [
    "Channel",
    "RadialBlock",
    "sph_jn_array",
    "sph_h1_array",
    "channel_coupling",
    "oracle_M_block",
    "oracle_lambda_block",
    "oracle_gap_eigenvalues",
    "oracle_phase_shifts",
    "oracle_cavity_eigenvalues",
    "oracle_gram_column",
    "channel_projector",
    "channel_smatrix",
]

_MAX_KAPPA = 12


class SpecialFunctionRangeError(ValueError):
    """Channel order/argument combination outside the supported range."""


@dataclass(frozen=True)
class Channel:
    """Angular channel: spin-orbit index kappa and the two orbital indices."""

    kappa: int

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")
        if abs(self.kappa) > _MAX_KAPPA:
            raise SpecialFunctionRangeError(f"|kappa| <= {_MAX_KAPPA} supported")

    @property
    def l(self) -> int:
        return orbital_l(self.kappa)

    @property
    def l_bar(self) -> int:
        return orbital_l(-self.kappa)

    @property
    def degeneracy(self) -> int:
        return 2 * abs(self.kappa)


@dataclass(frozen=True)
class RadialBlock:
    """2x2 channel block of a surface operator at one spectral point."""

    kappa: int
    point: SpectralPoint
    matrix: np.ndarray


# ---------------------------------------------------------------------------
# complex spherical Bessel / Hankel functions by recurrence

def sph_jn_array(lmax: int, x: complex) -> np.ndarray:
    """j_0..j_lmax at complex argument.

    Upward recurrence when |x| dominates lmax, otherwise Miller's downward
    recurrence normalized by j_0; small arguments use the ascending series.
    Relative accuracy ~1e-12 for the orders used here (|kappa| <= 12).
    """
    x = complex(x)
    ax = abs(x)
    out = np.empty(lmax + 1, dtype=complex)
    if ax < 1e-6:
        # ascending series, two terms
        dfact = 1.0
        for l in range(lmax + 1):
            dfact *= 2 * l + 1
            out[l] = x**l / dfact * (1.0 - x * x / (2.0 * (2 * l + 3)))
        return out
    if ax > 2 * lmax + 4:
        out[0] = np.sin(x) / x
        if lmax >= 1:
            out[1] = np.sin(x) / x**2 - np.cos(x) / x
        for l in range(1, lmax):
            out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1]
        return out
    nstart = lmax + 20 + int(ax)
    fp, fc = 0.0 + 0.0j, 1e-280 + 0.0j  # f_{l+1}, f_l at l = nstart
    tail = np.zeros(lmax + 1, dtype=complex)
    for l in range(nstart, 0, -1):
        fm = (2 * l + 1) / x * fc - fp
        fp, fc = fc, fm
        if l - 1 <= lmax:
            tail[l - 1] = fm
        if max(abs(fm.real), abs(fm.imag)) > 1e250:
            fp /= 1e250
            fc /= 1e250
            tail /= 1e250
    j0 = np.sin(x) / x
    return tail * (j0 / tail[0])


def sph_h1_array(lmax: int, x: complex) -> np.ndarray:
    """Outgoing spherical Hankel h_0..h_lmax at complex argument (upward recurrence)."""
    x = complex(x)
    if abs(x) < 1e-12:
        raise SpecialFunctionRangeError("outgoing Hankel function undefined at 0")
    out = np.empty(lmax + 1, dtype=complex)
    out[0] = -1j * np.exp(1j * x) / x
    if lmax >= 1:
        out[1] = -np.exp(1j * x) * (x + 1j) / x**2
    for l in range(1, lmax):
        out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1]
    if not np.all(np.isfinite(out)):
        raise SpecialFunctionRangeError(f"Hankel overflow at lmax={lmax}, x={x}")
    return out


def _bessel_pair(lmax: int, x: complex):
    """(j, j', h, h') arrays for orders 0..lmax; f' = f_{l-1} - (l+1)/x f_l."""
    j = sph_jn_array(lmax + 1, x)
    h = sph_h1_array(lmax + 1, x)
    ls = np.arange(lmax + 2)
    jd = np.empty(lmax + 2, dtype=complex)
    hd = np.empty(lmax + 2, dtype=complex)
    jd[0], hd[0] = -j[1], -h[1]
    jd[1:] = j[:-1] - (ls[1:] + 1) / x * j[1:]
    hd[1:] = h[:-1] - (ls[1:] + 1) / x * h[1:]
    return j[: lmax + 1], jd[: lmax + 1], h[: lmax + 1], hd[: lmax + 1]


# ---------------------------------------------------------------------------
# channel blocks

def channel_coupling(coup: CouplingMatrix) -> np.ndarray:
    """Channel restriction of B = eta I + tau beta: diag(eta + tau, eta - tau)."""
    return np.diag([coup.eta + coup.tau, coup.eta - coup.tau]).astype(complex)


def _radial_factors(R: float, k: complex, l: int):
    """Value and mean derivative at r = R of ikR^2 j_l(k r_<) h_l(k r_>)."""
    lmax = l
    j, jd, h, hd = _bessel_pair(lmax, k * R)
    val = 1j * k * R**2 * j[l] * h[l]
    dmean = 0.5j * k**2 * R**2 * (jd[l] * h[l] + j[l] * hd[l])
    return val, dmean


def oracle_M_block(R: float, point: SpectralPoint, kappa: int) -> np.ndarray:
    """2x2 channel block of the mean trace of the single-layer potential."""
    ch = Channel(kappa)
    z, k = point.z, point.k
    F, Fm = _radial_factors(R, k, ch.l)
    G, Gm = _radial_factors(R, k, ch.l_bar)
    return np.array(
        [
            [(1.0 + z) * F, -(Gm + (1 - kappa) * G / R)],
            [Fm + (1 + kappa) * F / R, (z - 1.0) * G],
        ]
    )


def oracle_lambda_block(R: float, coup: CouplingMatrix, point: SpectralPoint, kappa: int,
                        singular_tol: float = 1e-12) -> np.ndarray:
    """Channel block of the shell-response operator (I + B M)^{-1} B."""
    if coup.regime is Regime.CRITICAL:
        raise ValueError("critical coupling is outside the supported regime")
    b = channel_coupling(coup)
    m = oracle_M_block(R, point, kappa)
    a = np.eye(2) + b @ m
    if np.linalg.cond(a) > 1.0 / singular_tol:
        raise ArithmeticError(f"channel kappa={kappa} nearly singular at z={point.z}")
    return np.linalg.solve(a, b)


# ---------------------------------------------------------------------------
# gap eigenvalues

def _gap_det(R: float, coup: CouplingMatrix, kappa: int, lam: float) -> float:
    p = spectral_point(lam, Side.INTERIOR)
    b = channel_coupling(coup)
    m = oracle_M_block(R, p, kappa)
    d = np.linalg.det(np.eye(2) + b @ m)
    return float(d.real)


def oracle_gap_eigenvalues(R: float, coup: CouplingMatrix, kappa_max: int = 6,
                           tol: float = 1e-8, n_scan: int = 400) -> list:
    """All gap eigenvalues with |kappa| <= kappa_max as (lambda, kappa) pairs.

    The channel characteristic function det(I + B M_kappa(lambda)) is real on
    the gap; roots are bracketed on a uniform scan and bisected to `tol`.
    """
    if coup.regime is Regime.CRITICAL:
        raise ValueError("critical coupling is outside the supported regime")
    if coup.is_trivial:
        return []
    lam_lo, lam_hi = -1.0 + 1e-6, 1.0 - 1e-6
    grid = np.linspace(lam_lo, lam_hi, n_scan)
    roots = []
    for kappa in [k for k in range(-kappa_max, kappa_max + 1) if k != 0]:
        vals = np.array([_gap_det(R, coup, kappa, lam) for lam in grid])
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append((float(grid[i]), kappa))
            elif vals[i] * vals[i + 1] < 0.0:
                lam0 = brentq(lambda t: _gap_det(R, coup, kappa, t),
                              grid[i], grid[i + 1], xtol=tol)
                roots.append((float(lam0), kappa))
    roots.sort()
    return roots


# ---------------------------------------------------------------------------
# scattering: channel projector, S-blocks, eigenphases

def channel_projector(lam: float) -> np.ndarray:
    """Energy-shell projector restricted to one channel pair (rank 1)."""
    k0 = np.sqrt(lam * lam - 1.0)
    return 0.5 * np.array([[1.0 + 1.0 / lam, -1j * k0 / lam],
                           [1j * k0 / lam, 1.0 - 1.0 / lam]])


def _channel_L(R: float, lam: float, kappa: int) -> np.ndarray:
    """Channel restriction of the surface-to-shell trace map.

    The surface Fourier integral of a channel spinor reduces to
    4 pi R^2 (-i)^l j_l(k0 R); the shell projector then mixes the pair.
    """
    ch = Channel(kappa)
    k0 = np.sqrt(lam * lam - 1.0)
    j = sph_jn_array(max(ch.l, ch.l_bar), k0 * R)
    d = np.diag([(-1j) ** ch.l * j[ch.l], (-1j) ** ch.l_bar * j[ch.l_bar]])
    return channel_projector(lam) @ d * (2 * np.pi) ** (-1.5) * 4 * np.pi * R**2


def channel_smatrix(R: float, coup: CouplingMatrix, lam: float, kappa: int,
                    side: Side = Side.UPPER) -> np.ndarray:
    """2x2 channel scattering block I - 2 pi i rho(lam) L (I+BM)^{-1} B L^* / R^2.

    rho(lam) = sqrt(lam^2-1) |lam| is the density of the shell measure in the
    energy variable; the 1/R^2 converts the surface pairing to coefficients.
    """
    if abs(lam) <= 1.0:
        raise ValueError("scattering requires |lambda| > 1")
    p = spectral_point(lam, side)
    lam_blk = oracle_lambda_block(R, coup, p, kappa)
    L = _channel_L(R, lam, kappa)
    rho = np.sqrt(lam * lam - 1.0) * abs(lam)
    return np.eye(2) - 2j * np.pi * rho / R**2 * (L @ lam_blk @ L.conj().T)


def oracle_phase_shifts(R: float, coup: CouplingMatrix, lam: float,
                        kappa_max: int = 6, side: Side = Side.UPPER) -> list:
    """Per-channel scattering blocks and eigenphases.

    Returns a list of dicts with keys kappa, smatrix (2x2), phase (delta,
    mod pi), unitarity (| |s|-1 | on the physical subspace), flagged.
    """
    if coup.regime is Regime.CRITICAL:
        raise ValueError("critical coupling is outside the supported regime")
    out = []
    for kappa in [k for k in range(-kappa_max, kappa_max + 1) if k != 0]:
        flagged = False
        try:
            s = channel_smatrix(R, coup, lam, kappa, side)
        except ArithmeticError:
            out.append({"kappa": kappa, "smatrix": None, "phase": np.nan,
                        "unitarity": np.nan, "flagged": True})
            continue
        pch = channel_projector(lam)
        w, v = np.linalg.eigh(pch)
        u = v[:, int(np.argmax(w.real))]
        sphys = complex(u.conj() @ s @ u)
        delta = 0.5 * np.angle(sphys)
        out.append({
            "kappa": kappa,
            "smatrix": s,
            "phase": float(np.mod(delta, np.pi)),
            "unitarity": abs(abs(sphys) - 1.0),
            "flagged": flagged,
        })
    return out


# ---------------------------------------------------------------------------
# confinement: interior cavity spectrum

def _cavity_fn(R: float, coup: CouplingMatrix, kappa: int, lam: float) -> float:
    """Interior eigenvalue condition for an impenetrable shell.

    A regular interior solution has radial pair (j_l(k0 r), s_k k0/(1+lam)
    j_lb(k0 r)) with s_k = sign(kappa); the decoupled boundary condition
    (rank-one channel jump matrix) reads g(R) + (eta+tau)/2 f(R) = 0.
    """
    k0 = np.sqrt(lam * lam - 1.0)
    ch = Channel(kappa)
    j = sph_jn_array(max(ch.l, ch.l_bar), k0 * R).real  # real argument
    sk = 1.0 if kappa > 0 else -1.0
    g = sk * k0 / (1.0 + lam) * j[ch.l_bar]
    return float(g + 0.5 * (coup.eta + coup.tau) * j[ch.l])


def oracle_cavity_eigenvalues(R: float, coup: CouplingMatrix, lam_min: float,
                              lam_max: float, kappa_max: int = 4,
                              tol: float = 1e-10) -> list:
    """Interior cavity eigenvalues in [lam_min, lam_max], |lam| > 1, confinement only."""
    if coup.regime is not Regime.CONFINEMENT:
        raise ValueError("cavity spectrum requires a confinement coupling")
    if lam_min >= lam_max:
        raise ValueError("empty window")
    roots = []
    sign = 1.0 if lam_min > 0 else -1.0
    if sign * lam_min <= 1.0 and sign * lam_max <= 1.0:
        raise ValueError("window must avoid [-1, 1]")
    grid = np.linspace(lam_min, lam_max, 600)
    grid = grid[np.abs(grid) > 1.0 + 1e-9]
    for kappa in [k for k in range(-kappa_max, kappa_max + 1) if k != 0]:
        vals = np.array([_cavity_fn(R, coup, kappa, lam) for lam in grid])
        for i in range(len(grid) - 1):
            if vals[i] * vals[i + 1] < 0.0:
                lam0 = brentq(lambda t: _cavity_fn(R, coup, kappa, t),
                              grid[i], grid[i + 1], xtol=tol)
                roots.append((float(lam0), kappa))
    roots.sort()
    return roots


# ---------------------------------------------------------------------------
# channel Gram blocks (overlap of single-layer fields at two spectral points)

def _radial_field(R: float, point: SpectralPoint, kappa: int, col: int, r: float):
    """Radial pair (upper, lower) of the single-layer field of a channel density.

    col = 0: density (Omega_kappa, 0); col = 1: density (0, i Omega_{-kappa}).
    """
    z, k = point.z, point.k
    ch = Channel(kappa)
    l, lb = ch.l, ch.l_bar
    lmax = max(l, lb)
    if r < R:
        jr, jdr, _, _ = _bessel_pair(lmax, k * r)
        jR, _, hR, _ = _bessel_pair(lmax, k * R)
        fval = {n: 1j * k * R**2 * jr[n] * hR[n] for n in (l, lb)}
        fder = {n: 1j * k**2 * R**2 * jdr[n] * hR[n] for n in (l, lb)}
    else:
        jR, _, _, _ = _bessel_pair(lmax, k * R)
        j2, _, h2, hd2 = _bessel_pair(lmax, k * r)
        fval = {n: 1j * k * R**2 * jR[n] * h2[n] for n in (l, lb)}
        fder = {n: 1j * k**2 * R**2 * jR[n] * hd2[n] for n in (l, lb)}
    if col == 0:
        upper = (1.0 + z) * fval[l]
        lower = fder[l] + (1 + kappa) * fval[l] / r
    else:
        upper = -(fder[lb] + (1 - kappa) * fval[lb] / r)
        lower = (z - 1.0) * fval[lb]
    return upper, lower


def oracle_gram_column(R: float, z1: complex, z2: complex, kappa: int,
                       quad_tol: float = 1e-10) -> np.ndarray:
    """Channel block of the field-overlap operator between spectral points z1, z2.

    Entry (i, j) is the radial integral of the single-layer fields at
    conj-parameter z1 and at z2 produced by channel densities j and tested
    against i, divided by R^2 to match the coefficient normalization of
    oracle_M_block.  Both fields must decay (gap or non-real points); the
    difference identity M(z1) - M(z2) = (z1 - z2) * gram(z1, z2) holds.
    """
    p1 = spectral_point(np.conj(z1), Side.INTERIOR)
    p2 = spectral_point(z2, Side.INTERIOR)
    if p1.k.imag <= 1e-12 or p2.k.imag <= 1e-12:
        raise ValueError("field overlap needs decaying fields on both sides")
    out = np.zeros((2, 2), dtype=complex)
    decay = min(p1.k.imag, p2.k.imag)
    rmax = R + 60.0 / decay  # exp(-60) tail cutoff

    def integrand(r, i, j):
        u1, l1 = _radial_field(R, p1, kappa, i, r)
        u2, l2 = _radial_field(R, p2, kappa, j, r)
        return (np.conj(u1) * u2 + np.conj(l1) * l2) * r * r

    for i in range(2):
        for j in range(2):
            inner, _ = quad(lambda r: integrand(r, i, j), 0.0, R,
                            epsabs=quad_tol, epsrel=quad_tol, complex_func=True, limit=200)
            outer, _ = quad(lambda r: integrand(r, i, j), R, rmax,
                            epsabs=quad_tol, epsrel=quad_tol, complex_func=True, limit=200)
            out[i, j] = (inner + outer) / R**2
    return out
