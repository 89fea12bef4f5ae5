# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_pykernels``; identical signatures."""
import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport cos, sin, floor, M_PI

cimport openmp

ctypedef double complex cplx


def set_num_threads(int count):
    openmp.omp_set_num_threads(count)


cdef inline Py_ssize_t _wrap(Py_ssize_t m, Py_ssize_t n) nogil:
    return m + n if m < 0 else m


def lag_products(f, g):
    """``C[j, m % n] = f[j+m] * conj(g[j-m])``; zero where out of range."""
    cdef const cplx[::1] F = np.ascontiguousarray(f, dtype=complex)
    cdef const cplx[::1] G = np.ascontiguousarray(g, dtype=complex)
    cdef Py_ssize_t n = F.shape[0], j, m, lo = -(n // 2), hi = n - n // 2
    out = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] C = out
    for j in range(n):
        for m in range(lo, hi):
            if 0 <= j + m < n and 0 <= j - m < n:
                C[j, _wrap(m, n)] = F[j + m] * G[j - m].conjugate()
    return out


def shear(F):
    """``G[j, m % n] = F[j+m, j-m]``; zero where out of range."""
    cdef const cplx[:, ::1] A = np.ascontiguousarray(F, dtype=complex)
    cdef Py_ssize_t n = A.shape[0], j, m, lo = -(n // 2), hi = n - n // 2
    out = np.zeros((n, n), dtype=complex)
    cdef cplx[:, ::1] G = out
    for j in range(n):
        for m in range(lo, hi):
            if 0 <= j + m < n and 0 <= j - m < n:
                G[j, _wrap(m, n)] = A[j + m, j - m]
    return out


def lag_products_2d(F, G):
    """``P[j, l, m % n, p % n] = F[j+m, l+p] * conj(G[j-m, l-p])``."""
    cdef const cplx[:, ::1] A = np.ascontiguousarray(F, dtype=complex)
    cdef const cplx[:, ::1] B = np.ascontiguousarray(G, dtype=complex)
    cdef Py_ssize_t n = A.shape[0], j, l, m, p, lo = -(n // 2), hi = n - n // 2
    out = np.zeros((n, n, n, n), dtype=complex)
    cdef cplx[:, :, :, ::1] P = out
    for j in range(n):
        for m in range(lo, hi):
            if not (0 <= j + m < n and 0 <= j - m < n):
                continue
            for l in range(n):
                for p in range(lo, hi):
                    if 0 <= l + p < n and 0 <= l - p < n:
                        P[j, l, _wrap(m, n), _wrap(p, n)] = (
                            A[j + m, l + p] * B[j - m, l - p].conjugate())
    return out


def type1_sum(x, eta, P, Q, R, amp, coeff, adjoint=False):
    """Oscillatory sum with the quadratic phase ``x.Px/2 + eta.Qx - eta.R eta/2``.

    Forward: ``out[j] = sum_k exp(2 pi i Phi(x_j, eta_k)) amp[j, k] coeff[k]``.
    Adjoint: ``out[k] = sum_j conj(exp(2 pi i Phi) amp[j, k]) coeff[j]``.
    ``amp`` may be ``None`` (unit amplitude).
    """
    cdef const double[:, ::1] X = np.ascontiguousarray(x, dtype=float)
    cdef const double[:, ::1] E = np.ascontiguousarray(eta, dtype=float)
    cdef const double[:, ::1] Pm = np.ascontiguousarray(P, dtype=float)
    cdef const double[:, ::1] Qm = np.ascontiguousarray(Q, dtype=float)
    cdef const double[:, ::1] Rm = np.ascontiguousarray(R, dtype=float)
    cdef const cplx[::1] c = np.ascontiguousarray(coeff, dtype=complex)
    cdef Py_ssize_t N = X.shape[0], M = E.shape[0]
    cdef bint has_amp = amp is not None
    cdef const cplx[:, ::1] a
    if has_amp:
        a = np.ascontiguousarray(np.broadcast_to(amp, (N, M)), dtype=complex)
    else:
        a = np.zeros((1, 1), dtype=complex)
    # per-point quadratic parts and Q x
    xPx_arr = 0.5 * np.einsum("id,de,ie->i", np.asarray(X), np.asarray(Pm), np.asarray(X))
    eRe_arr = 0.5 * np.einsum("kd,de,ke->k", np.asarray(E), np.asarray(Rm), np.asarray(E))
    Qx_arr = np.ascontiguousarray(np.asarray(X) @ np.asarray(Qm).T)
    cdef double[::1] xPx = xPx_arr
    cdef double[::1] eRe = eRe_arr
    cdef double[:, ::1] Qx = Qx_arr
    if not adjoint:
        out = np.zeros(N, dtype=complex)
        _forward(X, E, Qx, xPx, eRe, a, has_amp, c, out)
    else:
        out = np.zeros(M, dtype=complex)
        _adjoint(X, E, Qx, xPx, eRe, a, has_amp, c, out)
    return out


cdef void _forward(const double[:, ::1] X, const double[:, ::1] E, const double[:, ::1] Qx,
                   const double[::1] xPx, const double[::1] eRe, const cplx[:, ::1] a,
                   bint has_amp, const cplx[::1] c,
                   cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t N = X.shape[0], M = E.shape[0], d = X.shape[1], j, k, i
    cdef double ph, s_re, s_im, cr, ci, er, ei, tr, ti
    for j in prange(N, schedule="static"):
        s_re = 0.0
        s_im = 0.0
        for k in range(M):
            ph = xPx[j] - eRe[k]
            for i in range(d):
                ph = ph + E[k, i] * Qx[j, i]
            er = cos(2.0 * M_PI * ph)
            ei = sin(2.0 * M_PI * ph)
            if has_amp:
                tr = er * a[j, k].real - ei * a[j, k].imag
                ti = er * a[j, k].imag + ei * a[j, k].real
                er = tr
                ei = ti
            cr = c[k].real
            ci = c[k].imag
            s_re = s_re + er * cr - ei * ci
            s_im = s_im + er * ci + ei * cr
        out[j] = s_re + 1j * s_im


cdef void _adjoint(const double[:, ::1] X, const double[:, ::1] E, const double[:, ::1] Qx,
                   const double[::1] xPx, const double[::1] eRe, const cplx[:, ::1] a,
                   bint has_amp, const cplx[::1] c,
                   cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t N = X.shape[0], M = E.shape[0], d = X.shape[1], j, k, i
    cdef double ph, s_re, s_im, cr, ci, er, ei, tr, ti
    for k in prange(M, schedule="static"):
        s_re = 0.0
        s_im = 0.0
        for j in range(N):
            ph = xPx[j] - eRe[k]
            for i in range(d):
                ph = ph + E[k, i] * Qx[j, i]
            er = cos(2.0 * M_PI * ph)
            ei = -sin(2.0 * M_PI * ph)
            if has_amp:
                # conj(e * a) = conj(e) * conj(a)
                tr = er * a[j, k].real + ei * a[j, k].imag
                ti = ei * a[j, k].real - er * a[j, k].imag
                er = tr
                ei = ti
            cr = c[j].real
            ci = c[j].imag
            s_re = s_re + er * cr - ei * ci
            s_im = s_im + er * ci + ei * cr
        out[k] = s_re + 1j * s_im


cdef inline cplx _bilinear(const cplx[:, ::1] W, double u, double v) noexcept nogil:
    cdef Py_ssize_t n1 = W.shape[0], n2 = W.shape[1]
    cdef double fu, fv
    cdef Py_ssize_t i0, k0
    cdef cplx acc = 0
    if not (u > -1.0 and u < n1 and v > -1.0 and v < n2):
        return acc
    i0 = <Py_ssize_t> floor(u)
    k0 = <Py_ssize_t> floor(v)
    fu = u - i0
    fv = v - k0
    if 0 <= i0 < n1:
        if 0 <= k0 < n2:
            acc = acc + (1 - fu) * (1 - fv) * W[i0, k0]
        if 0 <= k0 + 1 < n2:
            acc = acc + (1 - fu) * fv * W[i0, k0 + 1]
    if 0 <= i0 + 1 < n1:
        if 0 <= k0 < n2:
            acc = acc + fu * (1 - fv) * W[i0 + 1, k0]
        if 0 <= k0 + 1 < n2:
            acc = acc + fu * fv * W[i0 + 1, k0 + 1]
    return acc


def interp_bilinear(W, double x0, double hx, double y0, double hy, xq, yq):
    """Bilinear interpolation of ``W[i, k]`` sampled at ``(x0 + i hx, y0 + k hy)``.

    Queries outside the sampled rectangle return zero.
    """
    cdef const cplx[:, ::1] A = np.ascontiguousarray(W, dtype=complex)
    xa = np.asarray(xq, dtype=float)
    shape = xa.shape
    cdef const double[::1] u = np.ascontiguousarray(xa.ravel())
    cdef const double[::1] v = np.ascontiguousarray(np.asarray(yq, dtype=float).ravel())
    cdef Py_ssize_t K = u.shape[0], q
    out = np.empty(K, dtype=complex)
    cdef cplx[::1] o = out
    with nogil:
        for q in prange(K, schedule="static"):
            o[q] = _bilinear(A, (u[q] - x0) / hx, (v[q] - y0) / hy)
    return out.reshape(shape)


def transport_marginals(Wa, Wb, Si, double x0, double hx, double y0, double hy, chunk=4):
    """Plane marginals of ``(Wa (x) Wb)(Si z)`` over the 4-d lattice.

    ``Wa`` and ``Wb`` are ``(n, n)`` samples at ``(x0 + i hx, y0 + k hy)``;
    ``Si`` acts on ``(x1, x2, xi1, xi2)``.  Returns the unnormalised sums
    ``M1[i1, k1] = sum_{i2, k2}`` and ``M2[i2, k2] = sum_{i1, k1}``.
    """
    cdef const cplx[:, ::1] A = np.ascontiguousarray(Wa, dtype=complex)
    cdef const cplx[:, ::1] B = np.ascontiguousarray(Wb, dtype=complex)
    cdef const double[:, ::1] S = np.ascontiguousarray(Si, dtype=float)
    cdef Py_ssize_t n = A.shape[0], i1, k1, i2, k2
    out1 = np.zeros((n, n))
    out2 = np.zeros((n, n, n))  # per-i1 partial sums of M2, reduced after the loop
    cdef double[:, ::1] M1 = out1
    cdef double[:, :, ::1] M2 = out2
    cdef double z0, z1, z2, z3, w0, w1, w2, w3, val, acc
    with nogil:
        for i1 in prange(n, schedule="static"):
            for k1 in range(n):
                acc = 0.0
                for i2 in range(n):
                    for k2 in range(n):
                        z0 = x0 + i1 * hx
                        z1 = x0 + i2 * hx
                        z2 = y0 + k1 * hy
                        z3 = y0 + k2 * hy
                        w0 = S[0, 0] * z0 + S[0, 1] * z1 + S[0, 2] * z2 + S[0, 3] * z3
                        w1 = S[1, 0] * z0 + S[1, 1] * z1 + S[1, 2] * z2 + S[1, 3] * z3
                        w2 = S[2, 0] * z0 + S[2, 1] * z1 + S[2, 2] * z2 + S[2, 3] * z3
                        w3 = S[3, 0] * z0 + S[3, 1] * z1 + S[3, 2] * z2 + S[3, 3] * z3
                        val = (_bilinear(A, (w0 - x0) / hx, (w2 - y0) / hy)
                               * _bilinear(B, (w1 - x0) / hx, (w3 - y0) / hy)).real
                        acc = acc + val
                        M2[i1, i2, k2] += val
                M1[i1, k1] = acc
    return out1, out2.sum(axis=0)
