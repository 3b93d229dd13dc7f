"""Discrete spectrum in the gap (-1, 1) and embedded-eigenvalue scans.

An energy lambda in the gap is an eigenvalue of the shell operator exactly
when I + B M_lambda is singular; the solver tracks the smallest singular
value of that matrix over a grid, then refines each dip by golden-section
search.  The smallest singular value is used instead of the determinant
because it stays well scaled at matrix dimensions of a few thousand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve, svdvals

from .algebra import CouplingMatrix, Regime, Side, spectral_point
from .bem import assemble_M, coupling_diagonal
from .geometry import SurfaceMesh

__all__ = [
    "GapSweep",
    "EigenvalueReport",
    "bs_sweep",
    "find_gap_eigenvalues",
    "essential_spectrum",
    "embedded_eigenvalue_scan",
    "characteristic_sigma_min",
]

#: dips of sigma_min below this value are treated as eigenvalue candidates
DIP_THRESHOLD = 0.1
#: matrices up to this size get exact singular values
_EXACT_SVD_MAX = 2048
_POWER_ITERS = 24


@dataclass(frozen=True)
class GapSweep:
    grid: np.ndarray
    sigma_min: np.ndarray
    eta: float
    tau: float
    mesh_fingerprint: str
    side: Side = Side.INTERIOR


@dataclass(frozen=True)
class EigenvalueReport:
    eigenvalues: list
    suspects: list
    grid: np.ndarray
    sigma_min: np.ndarray
    eta: float
    tau: float
    tol: float
    mesh_fingerprint: str
    meta: dict = field(default_factory=dict)


def characteristic_sigma_min(mesh: SurfaceMesh, coup: CouplingMatrix, lam: float,
                             side: Side = Side.INTERIOR, nthreads: int = 0,
                             m_matrix=None) -> float:
    """Smallest singular value of I + B M_lambda.

    Exact for small matrices; above _EXACT_SVD_MAX it is estimated by inverse
    power iteration on the LU factorization (deterministic start vector).
    """
    if m_matrix is None:
        m_matrix = assemble_M(mesh, spectral_point(lam, side), nthreads=nthreads).matrix
    b = coupling_diagonal(mesh, coup)
    a = b[:, None] * m_matrix
    idx = np.arange(a.shape[0])
    a[idx, idx] += 1.0
    n = a.shape[0]
    if n <= _EXACT_SVD_MAX:
        return float(svdvals(a)[-1])
    lu = lu_factor(a.T, overwrite_a=True, check_finite=False)

    def solve_a(v):
        return lu_solve(lu, v, trans=1, check_finite=False)

    def solve_ah(v):
        return np.conj(lu_solve(lu, np.conj(v), trans=0, check_finite=False))

    rng = np.random.default_rng(7)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    mu = 0.0
    for _ in range(_POWER_ITERS):
        w = solve_a(solve_ah(v))
        mu = np.linalg.norm(w)
        v = w / mu
    return float(1.0 / np.sqrt(mu))


def bs_sweep(mesh: SurfaceMesh, coup: CouplingMatrix, grid,
             nthreads: int = 0) -> GapSweep:
    """sigma_min(I + B M_lambda) over a gap grid (interior branch)."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) >= 1.0 - 1e-3):
        raise ValueError("gap grid must stay inside (-1 + 1e-3, 1 - 1e-3)")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if coup.regime is Regime.CRITICAL:
        raise ValueError("critical coupling (eta^2 - tau^2 = 4) is not supported")
    vals = np.array([characteristic_sigma_min(mesh, coup, lam, nthreads=nthreads)
                     for lam in grid])
    return GapSweep(grid=grid, sigma_min=vals, eta=coup.eta, tau=coup.tau,
                    mesh_fingerprint=mesh.fingerprint)


def _golden_minimize(f, a, b, tol):
    """Golden-section minimum of f on [a, b] to interval width tol."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (0.5 * (a + b), min(fc, fd))


def find_gap_eigenvalues(mesh: SurfaceMesh, coup: CouplingMatrix, tol: float = 1e-4,
                         grid=None, dip_threshold: float = DIP_THRESHOLD,
                         nthreads: int = 0, sweep: GapSweep | None = None) -> EigenvalueReport:
    """Locate and refine gap eigenvalues from dips of the characteristic sigma_min.

    Local minima of the sweep below `dip_threshold` are refined by
    golden-section search on sigma_min to a lambda-interval of width `tol`.
    A dip whose refined sigma_min stays above sqrt(dip_threshold) is reported
    in `suspects` instead of `eigenvalues`.
    """
    if sweep is None:
        if grid is None:
            grid = np.linspace(-0.995, 0.995, 81)
        sweep = bs_sweep(mesh, coup, grid, nthreads=nthreads)
    g, s = sweep.grid, sweep.sigma_min
    eigenvalues, suspects = [], []
    for i in range(len(g)):
        is_min = (i == 0 or s[i] < s[i - 1]) and (i == len(g) - 1 or s[i] <= s[i + 1])
        if not (is_min and s[i] < dip_threshold):
            continue
        lo = g[i - 1] if i > 0 else g[0]
        hi = g[i + 1] if i < len(g) - 1 else g[-1]
        lam0, smin = _golden_minimize(
            lambda t: characteristic_sigma_min(mesh, coup, t, nthreads=nthreads),
            lo, hi, tol)
        entry = {"lambda": float(lam0), "sigma_min": float(smin),
                 "bracket": [float(lo), float(hi)]}
        if smin < np.sqrt(dip_threshold):
            eigenvalues.append(entry)
        else:
            suspects.append(entry)
    eigenvalues.sort(key=lambda e: e["lambda"])
    return EigenvalueReport(eigenvalues=eigenvalues, suspects=suspects,
                            grid=g, sigma_min=s, eta=coup.eta, tau=coup.tau,
                            tol=tol, mesh_fingerprint=mesh.fingerprint)


def essential_spectrum() -> dict:
    """The essential spectrum is coupling-independent: (-inf, -1] u [1, inf)."""
    return {
        "bands": [[None, -1.0], [1.0, None]],
        "description": "(-inf,-1] U [1,inf)",
    }


def embedded_eigenvalue_scan(mesh: SurfaceMesh, coup: CouplingMatrix, grid,
                             side: Side = Side.UPPER, dip_threshold: float = DIP_THRESHOLD,
                             refine_tol: float | None = 1e-4, nthreads: int = 0) -> dict:
    """sigma_min(I + B M_lambda^+) along a grid outside [-1, 1].

    Away from the confinement regime no dips are expected; for an
    impenetrable shell isolated dips mark interior cavity energies.  Dips
    below `dip_threshold` are golden-section refined when `refine_tol` is set.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) <= 1.0):
        raise ValueError("embedded scan grid must satisfy |lambda| > 1")
    if coup.regime is Regime.CRITICAL:
        raise ValueError("critical coupling (eta^2 - tau^2 = 4) is not supported")
    vals = np.array([
        characteristic_sigma_min(mesh, coup, lam, side=side, nthreads=nthreads)
        for lam in grid
    ])
    dips = []
    for i in range(1, len(grid) - 1):
        if vals[i] < vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < dip_threshold:
            entry = {"lambda": float(grid[i]), "sigma_min": float(vals[i]),
                     "bracket": [float(grid[i - 1]), float(grid[i + 1])]}
            if refine_tol is not None:
                lam0, smin = _golden_minimize(
                    lambda t: characteristic_sigma_min(mesh, coup, t, side=side,
                                                       nthreads=nthreads),
                    grid[i - 1], grid[i + 1], refine_tol)
                entry.update({"lambda": float(lam0), "sigma_min": float(smin)})
            dips.append(entry)
    return {"grid": grid, "sigma_min": vals, "dips": dips,
            "eta": coup.eta, "tau": coup.tau, "side": side.value,
            "mesh_fingerprint": mesh.fingerprint}
