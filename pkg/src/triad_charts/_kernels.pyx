# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: torus averages of the perturbation and a
Wisdom-Holman splitting step for the heliocentric Hamiltonian."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, cos, fabs

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex z)

cnp.import_array()


def pair_average(double[:, :, ::1] x1, double[:, :, ::1] y1,
                 double[:, :, ::1] x2, double[:, :, ::1] y2,
                 double kd, double ki):
    """Mean over the N1 x N2 grid of (-kd/|x1 - x2|, ki y1.y2) per sample."""
    cdef Py_ssize_t S = x1.shape[0], N1 = x1.shape[1], N2 = x2.shape[1]
    cdef Py_ssize_t s, i, j, k
    cdef double dx, dy, dz, acc_d, acc_i, a0, a1, a2, m1, m2, row
    out = np.empty((S, 2))
    cdef double[:, ::1] o = out
    cdef double norm = 1.0 / (N1 * N2)
    with nogil:
        for s in range(S):
            acc_d = 0.0
            acc_i = 0.0
            for i in range(N1):
                a0 = x1[s, i, 0]
                a1 = x1[s, i, 1]
                a2 = x1[s, i, 2]
                row = 0.0
                for j in range(N2):
                    dx = a0 - x2[s, j, 0]
                    dy = a1 - x2[s, j, 1]
                    dz = a2 - x2[s, j, 2]
                    row += 1.0 / sqrt(dx * dx + dy * dy + dz * dz)
                acc_d += row
            # the indirect double mean factorizes; summing N1 N2 cancelling
            # products would only add roundoff
            acc_i = 0.0
            for k in range(3):
                m1 = 0.0
                m2 = 0.0
                for i in range(N1):
                    m1 += y1[s, i, k]
                for j in range(N2):
                    m2 += y2[s, j, k]
                acc_i += m1 * m2
            o[s, 0] = -kd * acc_d * norm
            o[s, 1] = ki * acc_i * norm
    return out


def pair_average_complex(double complex[:, :, ::1] x1, double complex[:, :, ::1] y1,
                         double complex[:, :, ::1] x2, double complex[:, :, ::1] y2,
                         double kd, double ki):
    """Analytic continuation of pair_average: 1/sqrt(d.d) with the principal
    square root (no conjugation)."""
    cdef Py_ssize_t S = x1.shape[0], N1 = x1.shape[1], N2 = x2.shape[1]
    cdef Py_ssize_t s, i, j, k
    cdef double complex dx, dy, dz, acc_d, acc_i, a0, a1, a2, m1, m2, row
    out = np.empty((S, 2), dtype=complex)
    cdef double complex[:, ::1] o = out
    cdef double norm = 1.0 / (N1 * N2)
    with nogil:
        for s in range(S):
            acc_d = 0.0
            acc_i = 0.0
            for i in range(N1):
                a0 = x1[s, i, 0]
                a1 = x1[s, i, 1]
                a2 = x1[s, i, 2]
                row = 0.0
                for j in range(N2):
                    dx = a0 - x2[s, j, 0]
                    dy = a1 - x2[s, j, 1]
                    dz = a2 - x2[s, j, 2]
                    row += 1.0 / csqrt(dx * dx + dy * dy + dz * dz)
                acc_d += row
            # the indirect double mean factorizes; summing N1 N2 cancelling
            # products would only add roundoff
            acc_i = 0.0
            for k in range(3):
                m1 = 0.0
                m2 = 0.0
                for i in range(N1):
                    m1 += y1[s, i, k]
                for j in range(N2):
                    m2 += y2[s, j, k]
                acc_i += m1 * m2
            o[s, 0] = -kd * acc_d * norm
            o[s, 1] = ki * acc_i * norm
    return out


cdef int kepler_drift(double* x, double* y, double mbar, double gm, double dt) nogil:
    """Advance one heliocentric Kepler orbit (momentum y = mbar v) by dt."""
    cdef double v0x = y[0] / mbar, v0y = y[1] / mbar, v0z = y[2] / mbar
    cdef double r0 = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    cdef double v2 = v0x * v0x + v0y * v0y + v0z * v0z
    cdef double u = x[0] * v0x + x[1] * v0y + x[2] * v0z
    cdef double ainv = 2.0 / r0 - v2 / gm
    if ainv <= 0:
        return -1
    cdef double a = 1.0 / ainv
    cdef double n = sqrt(gm * ainv * ainv * ainv)
    cdef double ec = 1.0 - r0 * ainv
    cdef double es = u / (n * a * a)
    cdef double M = n * dt
    cdef double dE = M, f, fp, s, c
    cdef int it
    for it in range(50):
        s = sin(dE)
        c = cos(dE)
        f = dE - ec * s + es * (1.0 - c) - M
        fp = 1.0 - ec * c + es * s
        dE -= f / fp
        if fabs(f) < 1e-15:
            break
    s = sin(dE)
    c = cos(dE)
    cdef double r = a * (1.0 - ec * c + es * s)
    cdef double ff = 1.0 - (a / r0) * (1.0 - c)
    cdef double gg = dt - (dE - s) / n
    cdef double fd = -a * a * n * s / (r * r0)
    cdef double gd = 1.0 - (a / r) * (1.0 - c)
    cdef double nx = ff * x[0] + gg * v0x
    cdef double ny = ff * x[1] + gg * v0y
    cdef double nz = ff * x[2] + gg * v0z
    y[0] = mbar * (fd * x[0] + gd * v0x)
    y[1] = mbar * (fd * x[1] + gd * v0y)
    y[2] = mbar * (fd * x[2] + gd * v0z)
    x[0] = nx
    x[1] = ny
    x[2] = nz
    return 0


cdef inline void kick(double* z, double k, double dt) nogil:
    # z = (y1, y2, x1, x2); k = mu mbar1 mbar2
    cdef double dx = z[6] - z[9], dy = z[7] - z[10], dz = z[8] - z[11]
    cdef double d2 = dx * dx + dy * dy + dz * dz
    cdef double f = k * dt / (d2 * sqrt(d2))
    z[0] -= f * dx
    z[1] -= f * dy
    z[2] -= f * dz
    z[3] += f * dx
    z[4] += f * dy
    z[5] += f * dz


cdef inline void shift(double* z, double c, double dt) nogil:
    # indirect term c y1.y2 with c = mu/m0 moves positions only
    cdef int k
    for k in range(3):
        z[6 + k] += c * dt * z[3 + k]
        z[9 + k] += c * dt * z[k]


def wh_run(double[::1] z0, double mbar1, double mbar2, double M1, double M2,
           double mu, double m0, double dt, long nsteps, long every,
           double[::1] weights):
    """Symmetric splitting (shift, kick, drift, kick, shift) composed with
    the given sub-step weights (e.g. (1,) or a Yoshida triple).

    Returns the states sampled every `every` steps, starting at step 0, and
    a status flag (0 ok, 1 non-elliptic Kepler drift)."""
    cdef double z[12]
    cdef int k, w
    cdef long step, ns = nsteps // every + 1, idx = 0
    cdef double kk = mu * mbar1 * mbar2, ci = mu / m0, h
    cdef int nw = weights.shape[0]
    out = np.empty((ns, 12))
    cdef double[:, ::1] o = out
    for k in range(12):
        z[k] = z0[k]
        o[0, k] = z[k]
    idx = 1
    cdef int status = 0
    with nogil:
        for step in range(1, nsteps + 1):
            for w in range(nw):
                h = dt * weights[w]
                shift(z, ci, 0.5 * h)
                kick(z, kk, 0.5 * h)
                if kepler_drift(&z[6], &z[0], mbar1, M1, h) != 0:
                    status = 1
                if kepler_drift(&z[9], &z[3], mbar2, M2, h) != 0:
                    status = 1
                kick(z, kk, 0.5 * h)
                shift(z, ci, 0.5 * h)
            if status:
                break
            if step % every == 0 and idx < ns:
                for k in range(12):
                    o[idx, k] = z[k]
                idx += 1
    return out[:idx], status
