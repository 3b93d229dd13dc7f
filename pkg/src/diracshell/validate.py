"""In-process invariant suites behind the `validate` CLI command.

Each suite returns a list of Check records (measured value vs tolerance).
Meshes are kept small here so the full run stays in the minutes range; the
heavyweight acceptance tolerances live in the pytest suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bem, scattering, spectrum
from .algebra import (
    ALPHA,
    BETA,
    ID4,
    Regime,
    Side,
    ThresholdError,
    coupling,
    fiber_projector,
    green_kernel,
    jump_matrices,
    momentum_branch,
    rotation_matrix,
    spectral_point,
    spinor_rotation,
)
from .geometry import generate_ellipsoid, generate_sphere, validate_mesh
from .oracle import (
    channel_coupling,
    oracle_M_block,
    oracle_gram_column,
    oracle_phase_shifts,
    sph_h1_array,
    sph_jn_array,
)
from .spinors import channel_spinors

__all__ = ["Check", "run_suite", "SUITES"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    warn_only: bool = False

    def as_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed, "warn_only": self.warn_only}


def _check(name, value, tol, warn_only=False):
    return Check(name=name, value=float(value), tolerance=float(tol),
                 passed=bool(value <= tol), warn_only=warn_only)


# ---------------------------------------------------------------------------

def suite_algebra(**_):
    checks = []
    worst = 0.0
    for j in range(3):
        for k in range(3):
            worst = max(worst, np.abs(ALPHA[j] @ ALPHA[k] + ALPHA[k] @ ALPHA[j]
                                      - 2 * (j == k) * ID4).max())
        worst = max(worst, np.abs(ALPHA[j] @ BETA + BETA @ ALPHA[j]).max())
    worst = max(worst, np.abs(BETA @ BETA - ID4).max())
    checks.append(_check("clifford_relations", worst, 1e-15))
    eig = np.sort(np.linalg.eigvalsh(ALPHA[2]))
    checks.append(_check("alpha3_eigenvalues", np.abs(eig - [-1, -1, 1, 1]).max(), 1e-14))

    worst = 0.0
    rng = np.random.default_rng(0)
    for lam in (1.5, -1.5, 3.0):
        for _ in range(3):
            xi = rng.normal(size=3)
            xi /= np.linalg.norm(xi)
            p = fiber_projector(lam, xi)
            worst = max(worst,
                        np.abs(p @ p - p).max(),
                        np.abs(p - p.conj().T).max(),
                        abs(np.trace(p).real - 2.0),
                        np.abs(p + fiber_projector(-lam, xi) - ID4).max())
            k0 = np.sqrt(lam * lam - 1)
            hmat = k0 * (xi[0] * ALPHA[0] + xi[1] * ALPHA[1] + xi[2] * ALPHA[2]) + BETA
            worst = max(worst, np.abs(hmat @ p - lam * p).max())
    checks.append(_check("fiber_projector_laws", worst, 1e-13))

    worst = max(abs(momentum_branch(2.0, Side.UPPER) - np.sqrt(3.0)),
                abs(momentum_branch(0.0) - 1j),
                abs(momentum_branch(-2.0, Side.UPPER) + np.sqrt(3.0)))
    for eps in (1e-3, 1e-6, 1e-9):
        worst = max(worst, abs(momentum_branch(-2.0 + 1j * eps) -
                               momentum_branch(-2.0, Side.UPPER)) - 2 * eps)
    for lam in (1.7, -2.2):
        worst = max(worst, abs(momentum_branch(lam, Side.UPPER)
                               + momentum_branch(lam, Side.LOWER)))
    checks.append(_check("momentum_branch_rules", worst, 1e-10))
    try:
        momentum_branch(1.0, Side.UPPER)
        checks.append(_check("threshold_rejected", 1.0, 0.0))
    except ThresholdError:
        checks.append(_check("threshold_rejected", 0.0, 0.5))

    regs = (coupling(0, 0).regime, coupling(2, 0).regime, coupling(0, 2).regime)
    ok = regs == (Regime.NONCRITICAL, Regime.CRITICAL, Regime.CONFINEMENT)
    checks.append(_check("coupling_regimes", 0.0 if ok else 1.0, 0.5))

    nu = np.array([0.36, -0.48, 0.8])
    jp, jm = jump_matrices(coupling(0, 0), nu)
    worst = abs(np.linalg.det(jp) - 1.0)
    jp2, jm2 = jump_matrices(coupling(0, 2), nu)
    worst = max(worst, abs(np.linalg.matrix_rank(jp2) - 2),
                abs(np.linalg.matrix_rank(jm2) - 2))
    jp3, _ = jump_matrices(coupling(1, 0), nu)
    worst = max(worst, 0.0 if abs(np.linalg.det(jp3)) > 1e-6 else 1.0)
    checks.append(_check("jump_matrices", worst, 1e-12))
    return checks


def suite_kernel(**_):
    checks = []
    rng = np.random.default_rng(1)
    p = spectral_point(0.5)
    worst = 0.0
    h = 1e-3
    for _ in range(20):
        d0 = rng.normal(size=3)
        d0 *= rng.uniform(0.5, 3.0) / np.linalg.norm(d0)
        res = np.zeros((4, 4), dtype=complex)
        for j in range(3):
            e = np.zeros(3)
            e[j] = 1.0
            der = (green_kernel(p, d0 - 2 * h * e) - 8 * green_kernel(p, d0 - h * e)
                   + 8 * green_kernel(p, d0 + h * e) - green_kernel(p, d0 + 2 * h * e)) / (12 * h)
            res += -1j * ALPHA[j] @ der
        res += (BETA - p.z * ID4) @ green_kernel(p, d0)
        worst = max(worst, np.linalg.norm(res) / np.linalg.norm(green_kernel(p, d0)))
    checks.append(_check("pde_residual_fd", worst, 1e-6))

    p0 = spectral_point(0.0)
    rs = np.linspace(1.0, 5.0, 17)
    d = np.array([1.0, 0.0, 0.0])
    # divide out the polynomial prefactor so only exp(-sqrt(1-z^2) r) remains
    vals = []
    for r in rs:
        pref = np.linalg.norm((p0.z * ID4 + BETA)
                              + 1j * (1.0 - 1j * p0.k * r) / r * ALPHA[0])
        vals.append(np.linalg.norm(green_kernel(p0, r * d)) * (4 * np.pi * r) / pref)
    slope = np.polyfit(rs, np.log(vals), 1)[0]
    checks.append(_check("gap_decay_rate", abs(slope + np.sqrt(1 - 0.0**2)), 0.02))

    worst = 0.0
    for _ in range(4):
        axis = rng.normal(size=3)
        ang = rng.uniform(0, 2 * np.pi)
        r3 = rotation_matrix(axis, ang)
        u = spinor_rotation(axis, ang)
        d0 = rng.normal(size=3)
        worst = max(worst, np.abs(u @ green_kernel(p, d0) @ u.conj().T
                                  - green_kernel(p, r3 @ d0)).max())
    checks.append(_check("rotation_covariance", worst, 1e-12))

    d0 = rng.normal(size=3)
    a = green_kernel(p, d0)
    b = green_kernel(p, -d0)
    flip = a.copy()
    flip[:2, 2:] *= -1
    flip[2:, :2] *= -1
    checks.append(_check("reflection_symmetry", np.abs(b - flip).max(), 1e-14))
    return checks


def suite_geometry(**_):
    checks = []
    ratios = []
    prev_h = None
    for s in range(5):
        m = generate_sphere(1.0, s)
        rep = validate_mesh(m)
        if rep.euler_characteristic != 2 or not rep.closed:
            checks.append(_check(f"sphere_subdiv{s}_topology", 1.0, 0.5))
        # the raw icosahedron -> subdiv 1 step is outside the asymptotic
        # halving regime; the invariant applies from subdiv 1 on
        if prev_h is not None and s >= 2:
            ratios.append(m.h / prev_h)
        prev_h = m.h
    checks.append(_check("sphere_topology", 0.0, 0.5))
    checks.append(_check("refinement_ratio", max(abs(r - 0.5) for r in ratios), 0.05))
    m3 = generate_sphere(1.0, 3)
    checks.append(_check("sphere_area", abs(m3.total_area - 4 * np.pi) / (4 * np.pi), 5e-3))
    checks.append(_check("sphere_volume", abs(m3.enclosed_volume - 4 * np.pi / 3) / (4 * np.pi / 3), 1e-2))
    rep3 = validate_mesh(m3)
    checks.append(_check("orientation_residual", rep3.orientation_residual, 1e-10))

    ell = generate_ellipsoid(2.0, 1.0, 1.0, 3)
    checks.append(_check("ellipsoid_volume",
                         abs(ell.enclosed_volume - 2 * 4 * np.pi / 3) / (2 * 4 * np.pi / 3), 1e-2))
    grad = ell.centroids / np.array([4.0, 1.0, 1.0])
    grad /= np.linalg.norm(grad, axis=1)[:, None]
    mis = np.linalg.norm(np.cross(grad, ell.normals), axis=1).max()
    checks.append(_check("ellipsoid_normals", mis, 3 * ell.h))
    return checks


def suite_bem(inject_wrong_side=False, **_):
    checks = []
    p = spectral_point(0.3)
    meshes = [generate_sphere(1.0, s) for s in (1, 2)]
    mats = [bem.assemble_M(m, p) for m in meshes]

    adj = []
    for m, op in zip(meshes, mats):
        a4 = bem.gram_diagonal(m)
        mz = op.matrix
        mzbar = bem.assemble_M(m, spectral_point(np.conj(p.z))).matrix
        err = np.linalg.norm(mz - (mzbar.conj().T * a4[None, :]) / a4[:, None]) / np.linalg.norm(mz)
        adj.append(err)
    checks.append(_check("adjoint_symmetry_subdiv2", adj[1], 0.10))
    checks.append(_check("adjoint_symmetry_trend", adj[1] / adj[0], 0.8))

    m, op = meshes[1], mats[1]
    coup = coupling(1.0, 0.0)
    lam1 = bem.assemble_Lambda(m, coup, p, m_op=op).matrix
    p2 = spectral_point(-0.4)
    op2 = bem.assemble_M(m, p2)
    lam2 = bem.assemble_Lambda(m, coup, p2, m_op=op2).matrix
    lhs = lam1 - lam2
    rhs = lam1 @ (op2.matrix - op.matrix) @ lam2
    checks.append(_check("lambda_two_point_identity",
                         np.linalg.norm(lhs - rhs) / np.linalg.norm(lam1), 1e-10))
    lam0 = bem.assemble_Lambda(m, coupling(0, 0), p, m_op=op).matrix
    checks.append(_check("lambda_trivial_coupling", np.abs(lam0).max(), 1e-300))

    g = bem.smooth_density(m, seed=5)
    res1 = bem.transmission_residual(m, coup, p, g, m_op=op)
    resc = bem.transmission_residual(m, coupling(0.0, 2.0), p, g, m_op=op)
    checks.append(_check("transmission_residual", res1["residual"], 1e-10))
    checks.append(_check("transmission_confinement_residual", resc["residual"], 1e-10))
    checks.append(_check("confinement_one_sided_traces",
                         max(resc["lhs_norm"], resc["rhs_norm"]), 1e-10))

    phi = bem.smooth_density(m, seed=2)
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(10, 3))
    pts = pts / np.linalg.norm(pts, axis=1)[:, None] * rng.uniform(1.6, 2.8, size=(10, 1))
    u = bem.potential_eval(m, phi, p, pts)
    psi = bem.random_density(m, seed=8)
    lin = bem.potential_eval(m, 2.0 * phi + psi, p, pts) - (
        2.0 * u + bem.potential_eval(m, psi, p, pts))
    checks.append(_check("potential_linearity",
                         np.abs(lin).max() / np.abs(u).max(), 1e-13))

    h = 1e-3
    worst = 0.0
    for x in pts[:5]:
        res = np.zeros(4, dtype=complex)
        for j in range(3):
            e = np.zeros(3)
            e[j] = 1.0
            der = (bem.potential_eval(m, phi, p, [x - 2 * h * e])[0]
                   - 8 * bem.potential_eval(m, phi, p, [x - h * e])[0]
                   + 8 * bem.potential_eval(m, phi, p, [x + h * e])[0]
                   - bem.potential_eval(m, phi, p, [x + 2 * h * e])[0]) / (12 * h)
            res += -1j * ALPHA[j] @ der
        u0 = bem.potential_eval(m, phi, p, [x])[0]
        res += (BETA - p.z * ID4) @ u0
        worst = max(worst, np.linalg.norm(res) / np.linalg.norm(u0))
    checks.append(_check("field_pde_residual", worst, 1e-4))

    ray = np.array([0.2, -0.3, 0.93])
    ray /= np.linalg.norm(ray)
    dists = np.linspace(0.8, 4.0, 13)
    vals = np.log([np.linalg.norm(bem.potential_eval(m, phi, p, [(1.0 + t) * ray])[0]) * (1 + t)
                   for t in dists])
    # regress on [1, r, log r]: the log term absorbs the algebraic prefactor
    design = np.stack([np.ones_like(dists), dists, np.log(1.0 + dists)], axis=1)
    slope = np.linalg.lstsq(design, vals, rcond=None)[0][1]
    kap = np.sqrt(1 - p.z.real**2)
    checks.append(_check("field_decay_rate", abs(slope + kap) / kap, 0.05))

    # channel decay of M^2 - 1/4 and beta M + M beta: visible at z = 0 on a
    # subdiv-3 mesh; the mesh resolves the decay through |kappa| = 3, with
    # |kappa| = 4 already at the discretization floor (endpoint check only)
    m3 = generate_sphere(1.0, 3)
    m3_op = bem.assemble_M(m3, spectral_point(0.0)).matrix
    a4 = bem.gram_diagonal(m3)
    beta_blocks = np.tile(np.array([1.0, 1.0, -1.0, -1.0]), m3.n_panels)

    def restricted_norm(make_image, kappa):
        e1, e2 = channel_spinors(kappa, 1,
                                 m3.centroids / np.linalg.norm(m3.centroids, axis=1)[:, None])
        v = np.stack([e1.reshape(-1), e2.reshape(-1)], axis=1)
        img = make_image(v)
        gram = v.conj().T @ (a4[:, None] * v)
        return np.linalg.norm(np.linalg.solve(gram, v.conj().T @ (a4[:, None] * img)))

    def msq_image(v):
        return m3_op @ (m3_op @ v) - 0.25 * v

    def anti_image(v):
        return beta_blocks[:, None] * (m3_op @ v) + m3_op @ (beta_blocks[:, None] * v)

    sm = [restricted_norm(msq_image, k) for k in (1, 2, 3, 4)]
    checks.append(_check("smoothing_decay_resolved", max(sm[1] / sm[0], sm[2] / sm[1]), 1.1))
    checks.append(_check("smoothing_k4_vs_k1", sm[3] / sm[0], 1.0))
    am = [restricted_norm(anti_image, k) for k in (1, 2, 3, 4)]
    checks.append(_check("anticommutator_decay", max(am[i + 1] / am[i] for i in range(3)), 1.1))

    lam0 = 1.5
    eps_list = [1e-1, 1e-2, 1e-3, 1e-4]
    norms = []
    for eps in eps_list:
        pe = spectral_point(lam0 + 1j * eps)
        ue = bem.potential_eval(m, phi, pe, pts)
        norms.append(np.sqrt(eps) * np.linalg.norm(ue))
    checks.append(_check("sqrt_eps_boundedness", max(norms) / max(norms[0], 1e-300), 3.0))
    return checks


def suite_oracle(**_):
    checks = []
    x = 1.7 + 0.4j
    lmax = 9
    j, h = sph_jn_array(lmax + 1, x), sph_h1_array(lmax + 1, x)
    # Wronskian j_l h_l' - j_l' h_l = i / x^2
    worst = 0.0
    for l in range(lmax):
        if l == 0:
            jd, hd = -j[1], -h[1]
        else:
            jd, hd = j[l - 1] - (l + 1) / x * j[l], h[l - 1] - (l + 1) / x * h[l]
        worst = max(worst, abs(j[l] * hd - jd * h[l] - 1j / x**2))
    checks.append(_check("bessel_wronskian", worst, 1e-12))

    z = spectral_point(0.35)
    zb = spectral_point(np.conj(0.35))
    worst = 0.0
    for kappa in (-2, -1, 1, 2):
        b1 = oracle_M_block(1.0, z, kappa)
        b2 = oracle_M_block(1.0, zb, kappa)
        worst = max(worst, np.abs(b1.conj().T - b2).max())
    checks.append(_check("block_adjoint_symmetry", worst, 1e-10))

    z0 = spectral_point(0.0)
    n1 = np.linalg.norm(oracle_M_block(1.0, z0, 1) @ oracle_M_block(1.0, z0, 1) - 0.25 * np.eye(2))
    n4 = np.linalg.norm(oracle_M_block(1.0, z0, 4) @ oracle_M_block(1.0, z0, 4) - 0.25 * np.eye(2))
    checks.append(_check("block_smoothing_ratio", n4 / n1, 0.5))

    z1, z2 = 0.2, 0.5
    for kappa in (-1, 2):
        g12 = oracle_gram_column(1.0, z1, z2, kappa)
        lhs = oracle_M_block(1.0, spectral_point(z1), kappa) - oracle_M_block(1.0, spectral_point(z2), kappa)
        worst = np.abs(lhs - (z1 - z2) * g12).max()
        checks.append(_check(f"gram_difference_identity_k{kappa}", worst, 1e-7))
    gz = oracle_gram_column(1.0, 0.3, 0.3, -1)
    eigs = np.linalg.eigvalsh(0.5 * (gz + gz.conj().T))
    checks.append(_check("gram_psd", max(0.0, -eigs.min()), 1e-12))
    checks.append(_check("gram_hermitian", np.abs(gz - gz.conj().T).max(), 1e-9))

    coup = coupling(1.0, 0.0)
    for lam in (1.5, -1.5):
        shifts = oracle_phase_shifts(1.0, coup, lam, kappa_max=6)
        worst = max(s["unitarity"] for s in shifts)
        checks.append(_check(f"channel_unitarity_lam{lam}", worst, 1e-8))
    shifts = oracle_phase_shifts(1.0, coup, 1.5, kappa_max=8)
    tail = {s["kappa"]: np.linalg.norm(s["smatrix"] - np.eye(2)) for s in shifts}
    checks.append(_check("large_kappa_triviality", tail[8], 1e-3))
    mono = max(tail[k + 1] / tail[k] for k in (5, 6, 7))
    checks.append(_check("large_kappa_monotone", mono, 1.0))

    ch_b = channel_coupling(coupling(0.0, 2.0))
    nu_ch = np.array([[0.0, -1.0], [1.0, 0.0]])
    jm_ch = nu_ch - 0.5 * ch_b
    checks.append(_check("confinement_channel_rank", abs(np.linalg.det(jm_ch)), 1e-14))

    m2 = generate_sphere(1.0, 2)
    z03 = spectral_point(0.3)
    mat = bem.assemble_M(m2, z03).matrix
    worst = 0.0
    for kappa in (-1, 1):
        blk = scattering.channel_block_density(m2, mat, kappa, 1)
        orc = oracle_M_block(1.0, z03, kappa)
        worst = max(worst, np.linalg.norm(blk - orc) / np.linalg.norm(orc))
    checks.append(_check("bem_cross_validation_subdiv2", worst, 0.08))
    return checks


def suite_spectrum(**_):
    checks = []
    desc = spectrum.essential_spectrum()
    ok = desc["description"] == "(-inf,-1] U [1,inf)"
    checks.append(_check("essential_spectrum_fixed", 0.0 if ok else 1.0, 0.5))

    m = generate_sphere(1.0, 1)
    grid = np.linspace(-0.9, 0.9, 7)
    sweep = spectrum.bs_sweep(m, coupling(0, 0), grid)
    checks.append(_check("trivial_coupling_sigma", np.abs(sweep.sigma_min - 1.0).max(), 1e-12))

    eta = 1.0
    s_pos = spectrum.bs_sweep(m, coupling(eta, 0.0), grid).sigma_min
    s_neg = spectrum.bs_sweep(m, coupling(-eta, 0.0), grid[::-1] * -1.0).sigma_min
    sym = np.abs(s_pos - s_neg[::-1]).max()
    checks.append(_check("charge_conjugation_symmetry", sym, 1e-8, warn_only=True))
    return checks


def suite_scatter(inject_wrong_side=False, **_):
    checks = []
    m = generate_sphere(1.0, 1)
    grid = scattering.direction_grid("lebedev", 26)
    coup = coupling(1.0, 0.0)
    lam = 1.5

    s0 = scattering.scattering_matrix(m, coupling(0, 0), lam, grid)
    checks.append(_check("free_smatrix_identity",
                         np.abs(s0.matrix - np.eye(s0.matrix.shape[0])).max(), 1e-300))

    side = Side.LOWER if inject_wrong_side else Side.UPPER
    sample = scattering.scattering_matrix(m, coup, lam, grid, side=side)
    defect = scattering.unitarity_defect(sample)
    checks.append(_check("unitarity_defect_subdiv1", defect, 0.05))

    pmat = sample.projector_matrix()
    offp = np.linalg.norm((np.eye(pmat.shape[0]) - pmat) @ sample.matrix @ pmat)
    checks.append(_check("range_consistency", offp, 1e-10))

    L = scattering.assemble_L(m, lam, grid)
    worst = 0.0
    for q in range(grid.n_nodes):
        pq = fiber_projector(lam, grid.nodes[q])
        rows = L[4 * q:4 * q + 4]
        worst = max(worst, np.abs(rows - pq @ rows).max())
    checks.append(_check("trace_map_range", worst, 1e-13))

    rng = np.random.default_rng(4)
    axis, ang = rng.normal(size=3), 1.1
    r3 = rotation_matrix(axis, ang)
    u4 = spinor_rotation(axis, ang)
    from .geometry import SurfaceMesh
    m_rot = SurfaceMesh(m.vertices @ r3.T, m.panels, meta=m.meta)
    phi = bem.smooth_density(m, seed=6)
    grid_rot = scattering.DirectionGrid(grid.nodes @ r3.T, grid.weights, grid.scheme, grid.degree)
    l_rot = scattering.assemble_L(m_rot, lam, grid_rot)
    f1 = (L @ phi.reshape(-1)).reshape(-1, 4)
    phi_rot = (u4 @ phi.T).T
    f2 = (l_rot @ phi_rot.reshape(-1)).reshape(-1, 4)
    cov = np.abs(f2 - (u4 @ f1.T).T).max() / np.abs(f1).max()
    checks.append(_check("trace_map_rotation_covariance", cov, 1e-8))

    gap = scattering.side_coherence_gap(m, coup, lam, grid)
    checks.append(_check("side_coherence_gap", gap, 0.2))

    s_wrong = scattering.scattering_matrix(m, coup, lam, grid, side=Side.LOWER)
    ratio = scattering.unitarity_defect(s_wrong) / max(
        scattering.unitarity_defect(scattering.scattering_matrix(m, coup, lam, grid)), 1e-300)
    checks.append(_check("wrong_side_degrades", 5.0 / ratio, 1.0))

    deltas = [1e-2, 1e-3]
    cs = []
    base = scattering.scattering_matrix(m, coup, lam, grid).matrix
    for d in deltas:
        s_d = scattering.scattering_matrix(m, coup, lam + d, grid).matrix
        cs.append(np.linalg.norm(s_d - base, 2) / d)
    checks.append(_check("lambda_continuity_constant", max(cs), 50.0, warn_only=True))

    etas = [0.1, 0.2, 0.4]
    m_small = generate_sphere(0.1, 1)   # small shell: genuinely Born regime
    tnorms = []
    for e in etas:
        s_e = scattering.scattering_matrix(m_small, coupling(e, 0.0), lam, grid)
        tnorms.append(np.linalg.norm(s_e.matrix - np.eye(s_e.matrix.shape[0]), 2))
    expo = np.polyfit(np.log(etas), np.log(tnorms), 1)[0]
    checks.append(_check("weak_coupling_exponent", abs(expo - 1.0), 0.1))
    return checks


SUITES = {
    "algebra": suite_algebra,
    "kernel": suite_kernel,
    "geometry": suite_geometry,
    "bem": suite_bem,
    "oracle": suite_oracle,
    "spectrum": suite_spectrum,
    "scatter": suite_scatter,
}


def run_suite(name: str, inject_wrong_side: bool = False) -> dict:
    """Run one suite (or 'all'); returns {suite: [check dicts], 'passed': bool}."""
    names = list(SUITES) if name == "all" else [name]
    out = {}
    ok = True
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {n!r}; have {sorted(SUITES)} or 'all'")
        checks = SUITES[n](inject_wrong_side=inject_wrong_side)
        out[n] = [c.as_dict() for c in checks]
        ok = ok and all(c.passed or c.warn_only for c in checks)
    out["passed"] = ok
    return out
