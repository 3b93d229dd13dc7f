"""On-shell scattering matrix on the energy-shell direction space.

For |lambda| > 1 the scattering matrix acts on spinor fields over the unit
sphere of directions that satisfy P_lam(xi) psi(xi) = psi(xi).  Discretely
the sphere is sampled by a quadrature grid (Q nodes, weights w_q) and

    S = I - 2 pi i rho(lam) L Lambda^+ A^{-1} L^H W,
    rho(lam) = sqrt(lam^2 - 1) |lam|,

where L maps panel densities to on-shell direction samples (surface Fourier
integral followed by the shell projector), Lambda^+ is the shell response at
lambda + i0, A is the panel-area Gram and W the direction-weight Gram.  The
weight rho is the density of the direct-integral measure over energies; the
adjoint L^* absorbs it, and misplacing it (or the +i0 side) destroys the
unitarity of S on the physical subspace, which the diagnostics here measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import CouplingMatrix, Side, fiber_projector, spectral_point
from .bem import ShellResponse, assemble_M, gram_diagonal
from .geometry import SurfaceMesh, triangle_rule
from .spinors import channel_spinors

__all__ = [
    "DirectionGrid",
    "ScatteringMatrixSample",
    "direction_grid",
    "assemble_L",
    "scattering_matrix",
    "unitarity_defect",
    "cross_sections",
    "partial_wave_project",
    "channel_block_density",
    "side_coherence_gap",
]

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class DirectionGrid:
    """Quadrature nodes and weights on the unit sphere of directions."""

    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    degree: int

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    def projector_blocks(self, lam: float) -> np.ndarray:
        """P_lam(xi_q) for every node, shape (Q, 4, 4)."""
        return np.stack([fiber_projector(lam, xi) for xi in self.nodes])

    def weight_diagonal(self) -> np.ndarray:
        return np.repeat(self.weights, 4)


_LEBEDEV_26 = None


def _lebedev_26():
    """26-point octahedral rule, exact through degree 7."""
    global _LEBEDEV_26
    if _LEBEDEV_26 is None:
        pts, wts = [], []
        for s in (1, -1):
            for ax in range(3):
                p = np.zeros(3)
                p[ax] = s
                pts.append(p)
                wts.append(1.0 / 21.0)
        r = 1.0 / np.sqrt(2.0)
        for ax1 in range(3):
            for ax2 in range(ax1 + 1, 3):
                for s1 in (1, -1):
                    for s2 in (1, -1):
                        p = np.zeros(3)
                        p[ax1], p[ax2] = s1 * r, s2 * r
                        pts.append(p)
                        wts.append(4.0 / 105.0)
        r = 1.0 / np.sqrt(3.0)
        for s1 in (1, -1):
            for s2 in (1, -1):
                for s3 in (1, -1):
                    pts.append(np.array([s1 * r, s2 * r, s3 * r]))
                    wts.append(9.0 / 280.0)
        _LEBEDEV_26 = (np.array(pts), 4.0 * np.pi * np.array(wts))
    return _LEBEDEV_26


def _spherical_triangle_area(a, b, c):
    """Spherical excess of a geodesic triangle on the unit sphere."""
    num = abs(np.dot(a, np.cross(b, c)))
    den = 1.0 + np.dot(a, b) + np.dot(b, c) + np.dot(c, a)
    return 2.0 * np.arctan2(num, den)


def _icosahedral_grid(order: int):
    from .geometry import generate_sphere

    mesh = generate_sphere(1.0, order)
    verts = mesh.vertices
    w = np.zeros(len(verts))
    for (i, j, k) in mesh.panels:
        ex = _spherical_triangle_area(verts[i], verts[j], verts[k])
        w[[i, j, k]] += ex / 3.0
    return verts, w


def direction_grid(scheme: str, order: int) -> DirectionGrid:
    """Symmetric direction quadrature.

    'lebedev': order is the node count (6 or 26; degree 3 or 7).
    'icosahedral': order is the subdivision level (12 * ... nodes, degree 5,
    weights from the spherical areas of the dual triangles).
    """
    if scheme == "lebedev":
        if order == 6:
            pts = np.concatenate([np.eye(3), -np.eye(3)])
            return DirectionGrid(pts, np.full(6, 4 * np.pi / 6), "lebedev", 3)
        if order == 26:
            pts, wts = _lebedev_26()
            return DirectionGrid(pts.copy(), wts.copy(), "lebedev", 7)
        raise ValueError(f"unsupported lebedev order {order}; have 6, 26")
    if scheme == "icosahedral":
        if not (0 <= order <= 5):
            raise ValueError("icosahedral order (subdivision level) must be 0..5")
        pts, wts = _icosahedral_grid(order)
        return DirectionGrid(pts, wts, "icosahedral", 5)
    raise ValueError(f"unknown direction-grid scheme {scheme!r}")


def assemble_L(mesh: SurfaceMesh, lam: float, grid: DirectionGrid,
               quad_order: int = 3) -> np.ndarray:
    """On-shell trace map from panel densities to direction samples, (4Q, 4N).

    Row block q is P_lam(xi_q) (2 pi)^{-3/2} times the panel quadrature of
    exp(-i k0 xi_q . y) with k0 = +sqrt(lam^2 - 1); every row block lies in
    the range of its projector by construction.
    """
    if abs(lam) <= 1.0:
        raise ValueError("the on-shell trace map needs |lambda| > 1")
    k0 = np.sqrt(lam * lam - 1.0)
    rule = triangle_rule(quad_order)
    a, b, c = mesh.corners()
    phase = np.zeros((grid.n_nodes, mesh.n_panels), dtype=complex)
    for bary, w in zip(rule.points, rule.weights):
        y = bary[0] * a + bary[1] * b + bary[2] * c
        phase += w * np.exp(-1j * k0 * (grid.nodes @ y.T))
    phase *= mesh.areas[None, :] * (2.0 * np.pi) ** (-1.5)
    pblocks = grid.projector_blocks(lam)
    out = np.einsum("qn,qab->qanb", phase, pblocks)
    return np.ascontiguousarray(out.reshape(4 * grid.n_nodes, 4 * mesh.n_panels))


@dataclass(frozen=True)
class ScatteringMatrixSample:
    """Sampled scattering matrix at one energy.

    matrix acts on direction-sampled spinor fields (4Q vector); it equals the
    identity on the complement of the physical subspace ran(P).
    """

    lam: float
    side: Side
    matrix: np.ndarray
    grid: DirectionGrid
    rho: float
    mesh_fingerprint: str
    eta: float
    tau: float
    warnings: list = field(default_factory=list)

    def projector_blocks(self) -> np.ndarray:
        return self.grid.projector_blocks(self.lam)

    def projector_matrix(self) -> np.ndarray:
        q = self.grid.n_nodes
        p = np.zeros((4 * q, 4 * q), dtype=complex)
        for i, blk in enumerate(self.projector_blocks()):
            p[4 * i:4 * i + 4, 4 * i:4 * i + 4] = blk
        return p

    @property
    def k0(self) -> float:
        return float(np.sqrt(self.lam**2 - 1.0))


def scattering_matrix(mesh: SurfaceMesh, coup: CouplingMatrix, lam: float,
                      grid: DirectionGrid, side: Side = Side.UPPER,
                      m_op=None, nthreads: int = 0,
                      reuse_m: bool = False) -> ScatteringMatrixSample:
    """Sampled scattering matrix S = I - 2 pi i rho L Lambda A^{-1} L^H W.

    `side` selects the boundary value of the shell response; the physical
    scattering matrix uses Side.UPPER (retarded limit).  With reuse_m=True the
    supplied M matrix is consumed in place (large-mesh path).
    """
    if abs(lam) <= 1.0:
        raise ValueError("scattering requires |lambda| > 1")
    point = spectral_point(lam, side)
    resp = ShellResponse(mesh, coup, point, m_op=m_op, nthreads=nthreads,
                         reuse_m=reuse_m)
    L = assemble_L(mesh, lam, grid)
    w4 = grid.weight_diagonal()
    a4 = gram_diagonal(mesh)
    rhs = (L.conj().T * w4[None, :]) / a4[:, None]
    rho = float(np.sqrt(lam * lam - 1.0) * abs(lam))
    t = -TWO_PI_I * rho * (L @ resp.apply(rhs))
    s = t
    idx = np.arange(s.shape[0])
    s[idx, idx] += 1.0
    return ScatteringMatrixSample(lam=float(lam), side=side, matrix=s, grid=grid,
                                  rho=rho, mesh_fingerprint=mesh.fingerprint,
                                  eta=coup.eta, tau=coup.tau,
                                  warnings=list(resp.warnings))


def unitarity_defect(sample: ScatteringMatrixSample) -> float:
    """|| P (S^H W S - W) P ||_2 / ||W||_2 on the physical subspace."""
    s = sample.matrix
    w4 = sample.grid.weight_diagonal()
    p = sample.projector_matrix()
    d = s.conj().T @ (w4[:, None] * s) - np.diag(w4)
    d = p.conj().T @ d @ p
    return float(np.linalg.norm(d, 2) / w4.max())


def cross_sections(sample: ScatteringMatrixSample, xi0, spinor) -> dict:
    """Differential and total cross sections for an incident on-shell state.

    xi0 must coincide with a grid node; `spinor` must satisfy
    P_lam(xi0) a = a.  The scattering amplitude is read from the smooth
    kernel density of S - I (the direction weight divided out), normalized by
    2 pi / (i k0); this fixes dsigma/dOmega = |f|^2 up to the usual
    flux convention, and sigma_total follows by grid quadrature.
    """
    xi0 = np.asarray(xi0, dtype=float)
    dist = np.linalg.norm(sample.grid.nodes - xi0[None, :], axis=1)
    q0 = int(np.argmin(dist))
    if dist[q0] > 1e-9:
        raise ValueError("incident direction must be one of the grid nodes")
    a = np.asarray(spinor, dtype=complex)
    p0 = fiber_projector(sample.lam, sample.grid.nodes[q0])
    if np.linalg.norm(p0 @ a - a) > 1e-8 * np.linalg.norm(a):
        raise ValueError("incident spinor is not in the physical subspace at xi0")
    s = sample.matrix
    q = sample.grid.n_nodes
    t_col = s[:, 4 * q0:4 * q0 + 4].copy()
    t_col[4 * q0:4 * q0 + 4] -= np.eye(4)
    t_col /= sample.grid.weights[q0]         # kernel density at column xi0
    amp = (2.0 * np.pi / (1j * sample.k0)) * (t_col @ a).reshape(q, 4)
    dsigma = np.sum(np.abs(amp) ** 2, axis=1)
    total = float(sample.grid.weights @ dsigma)
    return {"directions": sample.grid.nodes, "dsigma": dsigma,
            "sigma_total": total, "amplitude": amp}


def partial_wave_project(sample: ScatteringMatrixSample, kappa: int, m2: int) -> np.ndarray:
    """Galerkin restriction of S to one channel pair on the direction grid (2x2)."""
    e1, e2 = channel_spinors(kappa, m2, sample.grid.nodes)
    v = np.stack([e1.reshape(-1), e2.reshape(-1)], axis=1)
    w4 = sample.grid.weight_diagonal()
    gram = v.conj().T @ (w4[:, None] * v)
    return np.linalg.solve(gram, v.conj().T @ (w4[:, None] * (sample.matrix @ v)))


def channel_block_density(mesh: SurfaceMesh, matrix: np.ndarray, kappa: int,
                          m2: int) -> np.ndarray:
    """Galerkin restriction of a density-side operator to one channel pair (2x2).

    Requires a sphere mesh (channel spinors are sampled on radial directions).
    """
    if mesh.meta.get("shape") != "sphere":
        raise ValueError("channel restriction requires a sphere mesh "
                         f"(got meta {mesh.meta!r}, fingerprint {mesh.fingerprint})")
    xyz = mesh.centroids / np.linalg.norm(mesh.centroids, axis=1)[:, None]
    e1, e2 = channel_spinors(kappa, m2, xyz)
    v = np.stack([e1.reshape(-1), e2.reshape(-1)], axis=1)
    a4 = gram_diagonal(mesh)
    gram = v.conj().T @ (a4[:, None] * v)
    return np.linalg.solve(gram, v.conj().T @ (a4[:, None] * (matrix @ v)))


def side_coherence_gap(mesh: SurfaceMesh, coup: CouplingMatrix, lam: float,
                       grid: DirectionGrid, nthreads: int = 0) -> float:
    """Mismatch between the lower boundary value and the W-adjoint of the upper.

    In the continuum S(lambda-i0)-built matrix equals 2P - W^{-1} S^H W; the
    returned relative gap vanishes under mesh refinement and is O(1) if a
    side tag is wired wrong.
    """
    s_up = scattering_matrix(mesh, coup, lam, grid, side=Side.UPPER, nthreads=nthreads)
    s_dn = scattering_matrix(mesh, coup, lam, grid, side=Side.LOWER, nthreads=nthreads)
    w4 = grid.weight_diagonal()
    p = s_up.projector_matrix()
    adj = (s_up.matrix.conj().T * w4[None, :]) / w4[:, None]
    expected = 2.0 * p - p @ adj @ p + (np.eye(len(w4)) - p)
    got = p @ s_dn.matrix @ p + (np.eye(len(w4)) - p)
    scale = np.linalg.norm(p @ (s_up.matrix - np.eye(len(w4))) @ p, 2)
    denom = max(scale, 1e-30)
    return float(np.linalg.norm(got - expected, 2) / denom)
