# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled kernel backend; mirrors kernels._py loop for loop.

Rows of the collocation matrix are independent and are distributed over
OpenMP threads; every entry is computed by exactly one thread, so results are
bit-identical for any thread count.
"""

from cython.parallel import prange

from libc.math cimport sqrt, log, atan2, cos, sin

import numpy as np


cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double cabs(double complex)

DEF FOURPI = 12.566370614359172


cdef inline void _accum_block(double complex z, double complex k,
                              double d0, double d1, double d2, double w,
                              double complex* o, Py_ssize_t ld) noexcept nogil:
    """Add w * phi(d) into the 4x4 block at o with leading dimension ld."""
    cdef double r = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    cdef double complex g = cexp(1j * k * r) / (FOURPI * r)
    cdef double complex c = 1j * g * (1.0 - 1j * k * r) / (r * r)
    cdef double complex gz = g * z
    cdef double complex t3 = c * d2
    cdef double complex tp = c * (d0 + 1j * d1)
    cdef double complex tm = c * (d0 - 1j * d1)
    o[0] += w * (gz + g)
    o[ld + 1] += w * (gz + g)
    o[2 * ld + 2] += w * (gz - g)
    o[3 * ld + 3] += w * (gz - g)
    o[2] += w * t3
    o[3] += w * tm
    o[ld + 2] += w * tp
    o[ld + 3] -= w * t3
    o[2 * ld] += w * t3
    o[2 * ld + 1] += w * tm
    o[3 * ld] += w * tp
    o[3 * ld + 1] -= w * t3


cdef inline void _accum_far(const double* x, const double* A, const double* B,
                            const double* C, double area,
                            double complex z, double complex k,
                            const double* qb, const double* qw, Py_ssize_t nq,
                            double complex* o, Py_ssize_t ld) noexcept nogil:
    cdef Py_ssize_t q
    cdef double y0, y1, y2
    for q in range(nq):
        y0 = qb[3 * q] * A[0] + qb[3 * q + 1] * B[0] + qb[3 * q + 2] * C[0]
        y1 = qb[3 * q] * A[1] + qb[3 * q + 1] * B[1] + qb[3 * q + 2] * C[1]
        y2 = qb[3 * q] * A[2] + qb[3 * q + 1] * B[2] + qb[3 * q + 2] * C[2]
        _accum_block(z, k, x[0] - y0, x[1] - y1, x[2] - y2,
                     area * qw[q], o, ld)


cdef inline void _accum_near(const double* x, const double* A, const double* B,
                             const double* C, double complex z, double complex k,
                             const double* qb, const double* qw, Py_ssize_t nq,
                             double complex* o, Py_ssize_t ld) noexcept nogil:
    """One 4-way midpoint subdivision, rule applied per child."""
    cdef double mab[3]
    cdef double mbc[3]
    cdef double mca[3]
    cdef double e1[3]
    cdef double e2[3]
    cdef double cr0, cr1, cr2, child_area
    cdef int j
    for j in range(3):
        mab[j] = 0.5 * (A[j] + B[j])
        mbc[j] = 0.5 * (B[j] + C[j])
        mca[j] = 0.5 * (C[j] + A[j])
        e1[j] = B[j] - A[j]
        e2[j] = C[j] - A[j]
    cr0 = e1[1] * e2[2] - e1[2] * e2[1]
    cr1 = e1[2] * e2[0] - e1[0] * e2[2]
    cr2 = e1[0] * e2[1] - e1[1] * e2[0]
    child_area = 0.125 * sqrt(cr0 * cr0 + cr1 * cr1 + cr2 * cr2)
    _accum_far(x, A, mab, mca, child_area, z, k, qb, qw, nq, o, ld)
    _accum_far(x, B, mbc, mab, child_area, z, k, qb, qw, nq, o, ld)
    _accum_far(x, C, mca, mbc, child_area, z, k, qb, qw, nq, o, ld)
    _accum_far(x, mab, mbc, mca, child_area, z, k, qb, qw, nq, o, ld)


cdef inline double complex _em1(double complex x) noexcept nogil:
    if cabs(x) < 1e-2:
        return x * (1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0 * (1.0 + x / 5.0))))
    return cexp(x) - 1.0


cdef inline double complex _strong_corr(double complex x) noexcept nogil:
    cdef double complex acc = 0
    cdef double complex xp = x
    cdef double fact = 1.0
    cdef int n
    if cabs(x) < 0.05:
        for n in range(2, 10):
            fact *= n
            xp *= x
            acc += (1 - n) / fact * xp
        return acc
    return cexp(x) * (1.0 - x) - 1.0


cdef void _self_block(const double* A, const double* B, const double* C,
                      double complex z, double complex k,
                      const double* glx, const double* glw, Py_ssize_t ngl,
                      double complex* o, Py_ssize_t ld) noexcept nogil:
    """Exact Coulomb/odd closed forms plus polar-wedge Gauss remainders."""
    cdef double cen[3]
    cdef double nrm[3]
    cdef double e1v[3]
    cdef double e2v[3]
    cdef double p[3]
    cdef double q[3]
    cdef double t[3]
    cdef double m[3]
    cdef double u0[3]
    cdef double u1[3]
    cdef double uvec[3]
    cdef double v_pure[3]
    cdef double complex v_corr[3]
    cdef double complex i_a = 0
    cdef double i_coul = 0
    cdef double nn, h, s1, s2, r1, r2, elog, tl, dotm
    cdef double theta_q, th, rho, r, scale
    cdef int e, j, it, ir
    cdef double complex qq
    for j in range(3):
        cen[j] = (A[j] + B[j] + C[j]) / 3.0
        e1v[j] = B[j] - A[j]
        e2v[j] = C[j] - A[j]
        v_pure[j] = 0.0
        v_corr[j] = 0
    nrm[0] = e1v[1] * e2v[2] - e1v[2] * e2v[1]
    nrm[1] = e1v[2] * e2v[0] - e1v[0] * e2v[2]
    nrm[2] = e1v[0] * e2v[1] - e1v[1] * e2v[0]
    nn = sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2])
    for j in range(3):
        nrm[j] /= nn
    for e in range(3):
        for j in range(3):
            if e == 0:
                p[j] = A[j]; q[j] = B[j]
            elif e == 1:
                p[j] = B[j]; q[j] = C[j]
            else:
                p[j] = C[j]; q[j] = A[j]
        tl = 0.0
        for j in range(3):
            t[j] = q[j] - p[j]
            tl += t[j] * t[j]
        tl = sqrt(tl)
        for j in range(3):
            t[j] /= tl
        m[0] = t[1] * nrm[2] - t[2] * nrm[1]
        m[1] = t[2] * nrm[0] - t[0] * nrm[2]
        m[2] = t[0] * nrm[1] - t[1] * nrm[0]
        h = 0.0; s1 = 0.0; s2 = 0.0; r1 = 0.0; r2 = 0.0
        for j in range(3):
            h += m[j] * (p[j] - cen[j])
            s1 += t[j] * (p[j] - cen[j])
            s2 += t[j] * (q[j] - cen[j])
            r1 += (p[j] - cen[j]) * (p[j] - cen[j])
            r2 += (q[j] - cen[j]) * (q[j] - cen[j])
        r1 = sqrt(r1); r2 = sqrt(r2)
        elog = log((r2 + s2) / (r1 + s1))
        i_coul += h * elog
        for j in range(3):
            v_pure[j] += m[j] * elog / FOURPI
        # polar wedge (cen, p, q): frame along (p - cen)
        tl = 0.0
        for j in range(3):
            u0[j] = p[j] - cen[j]
            u1[j] = q[j] - cen[j]
            tl += u0[j] * u0[j]
        tl = sqrt(tl)
        for j in range(3):
            u0[j] /= tl
        dotm = u1[0] * u0[0] + u1[1] * u0[1] + u1[2] * u0[2]
        for j in range(3):
            uvec[j] = u1[j] - dotm * u0[j]
        tl = sqrt(uvec[0] * uvec[0] + uvec[1] * uvec[1] + uvec[2] * uvec[2])
        for j in range(3):
            uvec[j] /= tl
        theta_q = atan2(u1[0] * uvec[0] + u1[1] * uvec[1] + u1[2] * uvec[2], dotm)
        for it in range(ngl):
            th = glx[it] * theta_q
            # ray direction cos(th) e1 + sin(th) e2 (e1 = u0, e2 = uvec)
            dotm = 0.0
            for j in range(3):
                p[j] = cos(th) * u0[j] + sin(th) * uvec[j]
                dotm += p[j] * m[j]
            rho = h / dotm
            for ir in range(ngl):
                r = glx[ir] * rho
                scale = glw[it] * theta_q * glw[ir] * rho
                i_a += scale * _em1(1j * k * r)
                qq = scale * (_strong_corr(1j * k * r) / r) / FOURPI
                for j in range(3):
                    v_corr[j] -= p[j] * qq
    cdef double complex coeff = (i_coul + i_a) / FOURPI
    cdef double complex v0 = v_pure[0] + v_corr[0]
    cdef double complex v1 = v_pure[1] + v_corr[1]
    cdef double complex v2 = v_pure[2] + v_corr[2]
    cdef double complex t3 = 1j * v2
    cdef double complex tp = 1j * (v0 + 1j * v1)
    cdef double complex tm = 1j * (v0 - 1j * v1)
    o[0] += (z + 1.0) * coeff
    o[ld + 1] += (z + 1.0) * coeff
    o[2 * ld + 2] += (z - 1.0) * coeff
    o[3 * ld + 3] += (z - 1.0) * coeff
    o[2] += t3
    o[3] += tm
    o[ld + 2] += tp
    o[ld + 3] -= t3
    o[2 * ld] += t3
    o[2 * ld + 1] += tm
    o[3 * ld] += tp
    o[3 * ld + 1] -= t3


def assemble_m_rows(const double[:, ::1] va, const double[:, ::1] vb, const double[:, ::1] vc,
                    const double[:, ::1] cent, const double[::1] areas, const double[::1] diams,
                    const long[::1] rows, double complex z, double complex k,
                    const double[:, ::1] farb, const double[::1] farw,
                    const double[:, ::1] nearb, const double[::1] nearw,
                    const double[::1] glx, const double[::1] glw,
                    double near_factor, double complex[:, ::1] out, int nthreads=0):
    cdef Py_ssize_t nrows = rows.shape[0]
    cdef Py_ssize_t nf = va.shape[0]
    cdef Py_ssize_t nq_far = farw.shape[0]
    cdef Py_ssize_t nq_near = nearw.shape[0]
    cdef Py_ssize_t ngl = glw.shape[0]
    cdef Py_ssize_t ld = out.shape[1]
    cdef Py_ssize_t ii, i, j
    cdef double dx, dy, dz, dist
    cdef double complex* optr
    cdef int nt = nthreads if nthreads > 0 else 0
    if nt == 0:
        for ii in prange(nrows, nogil=True):
            _assemble_one_row(ii, va, vb, vc, cent, areas, diams, rows, z, k,
                              farb, farw, nq_far, nearb, nearw, nq_near,
                              glx, glw, ngl, near_factor, out, ld, nf)
    else:
        for ii in prange(nrows, nogil=True, num_threads=nt):
            _assemble_one_row(ii, va, vb, vc, cent, areas, diams, rows, z, k,
                              farb, farw, nq_far, nearb, nearw, nq_near,
                              glx, glw, ngl, near_factor, out, ld, nf)
    return np.asarray(out)


cdef void _assemble_one_row(Py_ssize_t ii, const double[:, ::1] va, const double[:, ::1] vb,
                            const double[:, ::1] vc, const double[:, ::1] cent,
                            const double[::1] areas, const double[::1] diams, const long[::1] rows,
                            double complex z, double complex k,
                            const double[:, ::1] farb, const double[::1] farw, Py_ssize_t nq_far,
                            const double[:, ::1] nearb, const double[::1] nearw, Py_ssize_t nq_near,
                            const double[::1] glx, const double[::1] glw, Py_ssize_t ngl,
                            double near_factor, double complex[:, ::1] out,
                            Py_ssize_t ld, Py_ssize_t nf) noexcept nogil:
    cdef Py_ssize_t i = rows[ii]
    cdef Py_ssize_t j
    cdef double dx, dy, dz, dist
    cdef double complex* optr
    for j in range(nf):
        optr = &out[4 * ii, 4 * j]
        if j == i:
            _self_block(&va[i, 0], &vb[i, 0], &vc[i, 0], z, k,
                        &glx[0], &glw[0], ngl, optr, ld)
            continue
        dx = cent[i, 0] - cent[j, 0]
        dy = cent[i, 1] - cent[j, 1]
        dz = cent[i, 2] - cent[j, 2]
        dist = sqrt(dx * dx + dy * dy + dz * dz)
        if dist > near_factor * diams[j]:
            _accum_far(&cent[i, 0], &va[j, 0], &vb[j, 0], &vc[j, 0], areas[j],
                       z, k, &farb[0, 0], &farw[0], nq_far, optr, ld)
        else:
            _accum_near(&cent[i, 0], &va[j, 0], &vb[j, 0], &vc[j, 0],
                        z, k, &nearb[0, 0], &nearw[0], nq_near, optr, ld)


cdef void _eval_panel_adaptive(const double* x, const double* A, const double* B,
                               const double* C, double complex z, double complex k,
                               const double* farb, const double* farw, Py_ssize_t nq_far,
                               const double* nearb, const double* nearw, Py_ssize_t nq_near,
                               int depth, int max_depth,
                               double complex* o, Py_ssize_t ld) noexcept nogil:
    cdef double cen[3]
    cdef double e1[3]
    cdef double e2[3]
    cdef double mab[3]
    cdef double mbc[3]
    cdef double mca[3]
    cdef double d0, d1, d2, dist, diam, area, t
    cdef int j
    for j in range(3):
        cen[j] = (A[j] + B[j] + C[j]) / 3.0
        e1[j] = B[j] - A[j]
        e2[j] = C[j] - A[j]
    diam = 0.0
    t = sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2])
    if t > diam: diam = t
    t = sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2])
    if t > diam: diam = t
    t = sqrt((C[0]-B[0])**2 + (C[1]-B[1])**2 + (C[2]-B[2])**2)
    if t > diam: diam = t
    d0 = x[0] - cen[0]; d1 = x[1] - cen[1]; d2 = x[2] - cen[2]
    dist = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    area = 0.0
    d0 = e1[1] * e2[2] - e1[2] * e2[1]
    d1 = e1[2] * e2[0] - e1[0] * e2[2]
    d2 = e1[0] * e2[1] - e1[1] * e2[0]
    area = 0.5 * sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    if dist > 2.0 * diam:
        _accum_far(x, A, B, C, area, z, k, farb, farw, nq_far, o, ld)
        return
    if dist > 1.2 * diam or depth >= max_depth:
        _accum_far(x, A, B, C, area, z, k, nearb, nearw, nq_near, o, ld)
        return
    for j in range(3):
        mab[j] = 0.5 * (A[j] + B[j])
        mbc[j] = 0.5 * (B[j] + C[j])
        mca[j] = 0.5 * (C[j] + A[j])
    _eval_panel_adaptive(x, A, mab, mca, z, k, farb, farw, nq_far, nearb, nearw, nq_near, depth + 1, max_depth, o, ld)
    _eval_panel_adaptive(x, B, mbc, mab, z, k, farb, farw, nq_far, nearb, nearw, nq_near, depth + 1, max_depth, o, ld)
    _eval_panel_adaptive(x, C, mca, mbc, z, k, farb, farw, nq_far, nearb, nearw, nq_near, depth + 1, max_depth, o, ld)
    _eval_panel_adaptive(x, mab, mbc, mca, z, k, farb, farw, nq_far, nearb, nearw, nq_near, depth + 1, max_depth, o, ld)


def eval_potential(const double[:, ::1] va, const double[:, ::1] vb, const double[:, ::1] vc,
                   const double[:, ::1] cent, const double[::1] areas, const double[::1] diams,
                   const double[:, ::1] targets, double complex z, double complex k,
                   const double[:, ::1] farb, const double[::1] farw,
                   const double[:, ::1] nearb, const double[::1] nearw,
                   const double complex[:, ::1] density, double complex[:, ::1] out,
                   int nthreads=0, int max_depth=4):
    cdef Py_ssize_t nt_pts = targets.shape[0]
    cdef Py_ssize_t ti
    for ti in prange(nt_pts, nogil=True):
        _eval_one_target(ti, va, vb, vc, cent, areas, diams, targets, z, k,
                         farb, farw, nearb, nearw, density, out, max_depth)
    return np.asarray(out)


cdef void _eval_one_target(Py_ssize_t ti, const double[:, ::1] va, const double[:, ::1] vb,
                           const double[:, ::1] vc, const double[:, ::1] cent, const double[::1] areas,
                           const double[::1] diams, const double[:, ::1] targets,
                           double complex z, double complex k,
                           const double[:, ::1] farb, const double[::1] farw,
                           const double[:, ::1] nearb, const double[::1] nearw,
                           const double complex[:, ::1] density, double complex[:, ::1] out,
                           int max_depth) noexcept nogil:
    cdef Py_ssize_t nf = va.shape[0]
    cdef Py_ssize_t nq_far = farw.shape[0]
    cdef Py_ssize_t nq_near = nearw.shape[0]
    cdef Py_ssize_t j, r, s
    cdef double dx, dy, dz, dist
    cdef double complex blk[16]
    for j in range(nf):
        dx = targets[ti, 0] - cent[j, 0]
        dy = targets[ti, 1] - cent[j, 1]
        dz = targets[ti, 2] - cent[j, 2]
        dist = sqrt(dx * dx + dy * dy + dz * dz)
        for r in range(16):
            blk[r] = 0
        if dist > 2.0 * diams[j]:
            _accum_far(&targets[ti, 0], &va[j, 0], &vb[j, 0], &vc[j, 0], areas[j],
                       z, k, &farb[0, 0], &farw[0], nq_far, blk, 4)
        else:
            _eval_panel_adaptive(&targets[ti, 0], &va[j, 0], &vb[j, 0], &vc[j, 0],
                                 z, k, &farb[0, 0], &farw[0], nq_far,
                                 &nearb[0, 0], &nearw[0], nq_near, 0, max_depth, blk, 4)
        for r in range(4):
            for s in range(4):
                out[ti, r] += blk[4 * r + s] * density[j, s]
