"""Pure-Python (numpy) kernel backend.

Reference implementation of the panel quadratures used by the boundary-element
assembly; the Cython backend mirrors this module loop for loop.  Conventions:

* kernel block: phi(d) = e^{ikr}/(4 pi r) [ (z I + beta) + (1 - ikr) i alpha.d / r^2 ]
* far panels (dist > near_factor * diam): one symmetric rule
* near panels: one 4-way midpoint subdivision, higher-order rule per child
* self panel: exact closed forms for the Coulomb part and the principal value
  of the odd part (boundary-contour logs), polar-wedge Gauss quadrature for
  the smooth remainders
"""

from __future__ import annotations

import numpy as np

_4PI = 4.0 * np.pi


def _kernel_blocks(z, k, d):
    """phi(d) for d of shape (..., 3); returns (..., 4, 4).

    Entries at d = 0 are set to zero (callers mask self-panel nodes).
    """
    r = np.linalg.norm(d, axis=-1)
    r = np.where(r == 0.0, 1.0, r)
    g = np.where(np.linalg.norm(d, axis=-1) == 0.0, 0.0,
                 np.exp(1j * k * r) / (_4PI * r))
    c = 1j * g * (1.0 - 1j * k * r) / r**2
    out = np.zeros(d.shape[:-1] + (4, 4), dtype=complex)
    gz = g * z
    out[..., 0, 0] = gz + g
    out[..., 1, 1] = gz + g
    out[..., 2, 2] = gz - g
    out[..., 3, 3] = gz - g
    t3 = c * d[..., 2]
    tp = c * (d[..., 0] + 1j * d[..., 1])
    tm = c * (d[..., 0] - 1j * d[..., 1])
    out[..., 0, 2] = t3
    out[..., 0, 3] = tm
    out[..., 1, 2] = tp
    out[..., 1, 3] = -t3
    out[..., 2, 0] = t3
    out[..., 2, 1] = tm
    out[..., 3, 0] = tp
    out[..., 3, 1] = -t3
    return out


def _panel_far(x, va, vb, vc, area, z, k, bary, w):
    y = bary @ np.stack([va, vb, vc])          # (nq, 3)
    blocks = _kernel_blocks(z, k, x[None, :] - y)
    return area * np.einsum("q,qij->ij", w, blocks)


def _panel_near(x, va, vb, vc, z, k, bary, w):
    mab, mbc, mca = 0.5 * (va + vb), 0.5 * (vb + vc), 0.5 * (vc + va)
    out = np.zeros((4, 4), dtype=complex)
    child_area = 0.25 * 0.5 * np.linalg.norm(np.cross(vb - va, vc - va))
    for ca, cb, cc in ((va, mab, mca), (vb, mbc, mab), (vc, mca, mbc), (mab, mbc, mca)):
        out += _panel_far(x, ca, cb, cc, child_area, z, k, bary, w)
    return out


def _em1(x):
    """exp(x) - 1 with the leading cancellation guarded."""
    if abs(x) < 1e-2:
        return x * (1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0 * (1.0 + x / 5.0))))
    return np.exp(x) - 1.0


def _strong_corr(x):
    """exp(x)(1 - x) - 1 = -sum_{n>=2} (n-1) x^n / n!  (starts at -x^2/2)."""
    if abs(x) < 0.05:
        acc, fact = 0.0 + 0.0j, 1.0
        xp = x
        for n in range(2, 10):
            fact *= n
            xp *= x
            acc += (1 - n) / fact * xp
        return acc
    return np.exp(x) * (1.0 - x) - 1.0


def _self_block(va, vb, vc, z, k, glx, glw):
    """Principal-value self integral of the kernel over a flat triangle at its centroid.

    Coulomb part and the pure odd part are exact (per-edge logs / contour
    integral); the remainders are radially smooth and integrated on polar
    wedges with the supplied [0,1] Gauss rule.
    """
    c = (va + vb + vc) / 3.0
    n = np.cross(vb - va, vc - va)
    n = n / np.linalg.norm(n)
    i_coul = 0.0
    v_pure = np.zeros(3)
    i_a = 0.0 + 0.0j
    v_corr = np.zeros(3, dtype=complex)
    for p, q in ((va, vb), (vb, vc), (vc, va)):
        t = q - p
        t = t / np.linalg.norm(t)
        m = np.cross(t, n)                      # outward in-plane edge normal
        h = float(m @ (p - c))
        s1, s2 = float(t @ (p - c)), float(t @ (q - c))
        r1, r2 = float(np.linalg.norm(p - c)), float(np.linalg.norm(q - c))
        elog = np.log((r2 + s2) / (r1 + s1))
        i_coul += h * elog
        v_pure += m * elog / _4PI
        # polar wedge (c, p, q): frame e1 along (p - c)
        u0, u1 = p - c, q - c
        e1 = u0 / np.linalg.norm(u0)
        e2 = u1 - (u1 @ e1) * e1
        e2 = e2 / np.linalg.norm(e2)
        theta_q = np.arctan2(float(u1 @ e2), float(u1 @ e1))
        for wt, xt in zip(glw, glx):
            th = xt * theta_q
            u = np.cos(th) * e1 + np.sin(th) * e2
            rho = h / float(u @ m)
            for wr, xr in zip(glw, glx):
                r = xr * rho
                scale = wt * theta_q * wr * rho
                i_a += scale * _em1(1j * k * r)
                if r > 0.0:
                    v_corr += scale * (-u) * (_strong_corr(1j * k * r) / r) / _4PI
    coeff = (i_coul + i_a) / _4PI
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = out[1, 1] = (z + 1.0) * coeff
    out[2, 2] = out[3, 3] = (z - 1.0) * coeff
    v = v_pure + v_corr
    t3 = 1j * v[2]
    tp = 1j * (v[0] + 1j * v[1])
    tm = 1j * (v[0] - 1j * v[1])
    out[0, 2] = t3
    out[0, 3] = tm
    out[1, 2] = tp
    out[1, 3] = -t3
    out[2, 0] = t3
    out[2, 1] = tm
    out[3, 0] = tp
    out[3, 1] = -t3
    return out


def assemble_m_rows(va, vb, vc, cent, areas, diams, rows, z, k,
                    farb, farw, nearb, nearw, glx, glw, near_factor, out, nthreads=0):
    """Fill row blocks of the collocation matrix of the mean-trace operator.

    out has shape (4*len(rows), 4*F) and is overwritten in place.
    """
    nf = va.shape[0]
    for ii, i in enumerate(rows):
        x = cent[i]
        dist = np.linalg.norm(cent - x[None, :], axis=1)
        far = dist > near_factor * diams
        far[i] = False
        # far panels, vectorized over panels and quad nodes
        y = np.einsum("qb,bfj->qfj", farb, np.stack([va, vb, vc]))  # (nq, F, 3)
        blocks = _kernel_blocks(z, k, x[None, None, :] - y)         # (nq, F, 4, 4)
        acc = np.einsum("q,f,qfij->fij", farw, areas * far, blocks)
        r0 = 4 * ii
        out[r0:r0 + 4].reshape(4, nf, 4).transpose(1, 0, 2)[far] = acc[far]
        for j in np.nonzero(~far)[0]:
            if j == i:
                blk = _self_block(va[i], vb[i], vc[i], z, k, glx, glw)
            else:
                blk = _panel_near(x, va[j], vb[j], vc[j], z, k, nearb, nearw)
            out[r0:r0 + 4, 4 * j:4 * j + 4] = blk
    return out


def _eval_panel_adaptive(x, va, vb, vc, z, k, farb, farw, nearb, nearw,
                         depth, max_depth):
    c = (va + vb + vc) / 3.0
    diam = max(np.linalg.norm(vb - va), np.linalg.norm(vc - vb), np.linalg.norm(va - vc))
    dist = np.linalg.norm(x - c)
    area = 0.5 * np.linalg.norm(np.cross(vb - va, vc - va))
    if dist > 2.0 * diam:
        return _panel_far(x, va, vb, vc, area, z, k, farb, farw)
    if dist > 1.2 * diam or depth >= max_depth:
        return _panel_far(x, va, vb, vc, area, z, k, nearb, nearw)
    mab, mbc, mca = 0.5 * (va + vb), 0.5 * (vb + vc), 0.5 * (vc + va)
    out = np.zeros((4, 4), dtype=complex)
    for ca, cb, cc in ((va, mab, mca), (vb, mbc, mab), (vc, mca, mbc), (mab, mbc, mca)):
        out += _eval_panel_adaptive(x, ca, cb, cc, z, k, farb, farw, nearb, nearw,
                                    depth + 1, max_depth)
    return out


def eval_potential(va, vb, vc, cent, areas, diams, targets, z, k,
                   farb, farw, nearb, nearw, density, out, nthreads=0, max_depth=4):
    """Single-layer field at off-surface targets; out has shape (T, 4)."""
    nf = va.shape[0]
    for ti, x in enumerate(targets):
        dist = np.linalg.norm(cent - x[None, :], axis=1)
        far = dist > 2.0 * diams
        y = np.einsum("qb,bfj->qfj", farb, np.stack([va, vb, vc]))
        blocks = _kernel_blocks(z, k, x[None, None, :] - y)
        acc = np.einsum("q,f,qfij,fj->i", farw, areas * far, blocks, density)
        for j in np.nonzero(~far)[0]:
            blk = _eval_panel_adaptive(x, va[j], vb[j], vc[j], z, k,
                                       farb, farw, nearb, nearw, 0, max_depth)
            acc = acc + blk @ density[j]
        out[ti] = acc
    return out
