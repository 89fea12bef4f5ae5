"""Pure-numpy implementations of the hot loops.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature; :mod:`wigprop._backend` picks one at import time.
"""
import numpy as np

_CHUNK = 1 << 22


def _lag_index(n):
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    m = np.where(m < n // 2, m, m - n)
    a = j + m
    b = j - m
    valid = (a >= 0) & (a < n) & (b >= 0) & (b < n)
    return np.clip(a, 0, n - 1), np.clip(b, 0, n - 1), valid


def lag_products(f, g):
    """``C[j, m % n] = f[j+m] * conj(g[j-m])``; zero where out of range."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    a, b, valid = _lag_index(f.shape[0])
    return np.where(valid, f[a] * np.conj(g[b]), 0.0)


def shear(F):
    """``G[j, m % n] = F[j+m, j-m]``; zero where out of range."""
    F = np.asarray(F, dtype=complex)
    a, b, valid = _lag_index(F.shape[0])
    return np.where(valid, F[a, b], 0.0)


def lag_products_2d(F, G):
    """``P[j, l, m % n, p % n] = F[j+m, l+p] * conj(G[j-m, l-p])``."""
    F = np.asarray(F, dtype=complex)
    Gc = np.conj(np.asarray(G, dtype=complex))
    n = F.shape[0]
    a, b, valid = _lag_index(n)
    out = np.empty((n, n, n, n), dtype=complex)
    for j in range(n):
        # (m, l, p) block for this j
        block = F[a[j]][:, a] * Gc[b[j]][:, b]
        mask = valid[j][:, None, None] & valid[None, :, :]
        out[j] = np.where(mask, block, 0.0).transpose(1, 0, 2)
    return out


def _phase(x, eta, P, Q, R):
    xPx = 0.5 * np.einsum("id,de,ie->i", x, P, x)
    eRe = 0.5 * np.einsum("kd,de,ke->k", eta, R, eta)
    cross = x @ Q.T @ eta.T  # (N, M): eta . Q x
    return xPx[:, None] + cross - eRe[None, :]


def type1_sum(x, eta, P, Q, R, amp, coeff, adjoint=False):
    """Oscillatory sum with the quadratic phase ``x.Px/2 + eta.Qx - eta.R eta/2``.

    Forward: ``out[j] = sum_k exp(2 pi i Phi(x_j, eta_k)) amp[j, k] coeff[k]``.
    Adjoint: ``out[k] = sum_j conj(exp(2 pi i Phi) amp[j, k]) coeff[j]``.
    ``amp`` may be ``None`` (unit amplitude).
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    P, Q, R = (np.asarray(m, dtype=float) for m in (P, Q, R))
    coeff = np.asarray(coeff, dtype=complex)
    N, M = x.shape[0], eta.shape[0]
    rows = max(1, _CHUNK // max(M, 1))
    out = np.zeros(M if adjoint else N, dtype=complex)
    for s in range(0, N, rows):
        e = slice(s, min(N, s + rows))
        ker = np.exp(2j * np.pi * _phase(x[e], eta, P, Q, R))
        if amp is not None:
            ker *= amp[e]
        if adjoint:
            out += np.conj(ker).T @ coeff[e]
        else:
            out[e] = ker @ coeff
    return out


def interp_bilinear(W, x0, hx, y0, hy, xq, yq):
    """Bilinear interpolation of ``W[i, k]`` sampled at ``(x0 + i hx, y0 + k hy)``.

    Queries outside the sampled rectangle return zero.
    """
    W = np.asarray(W, dtype=complex)
    n1, n2 = W.shape
    u = (np.asarray(xq, dtype=float) - x0) / hx
    v = (np.asarray(yq, dtype=float) - y0) / hy
    i0 = np.floor(u).astype(np.int64)
    k0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - k0
    out = np.zeros(u.shape, dtype=complex)
    for di, wi in ((0, 1 - fu), (1, fu)):
        for dk, wk in ((0, 1 - fv), (1, fv)):
            ii = i0 + di
            kk = k0 + dk
            ok = (ii >= 0) & (ii < n1) & (kk >= 0) & (kk < n2)
            vals = W[np.clip(ii, 0, n1 - 1), np.clip(kk, 0, n2 - 1)]
            out += np.where(ok, wi * wk * vals, 0.0)
    return out


def transport_marginals(Wa, Wb, Si, x0, hx, y0, hy, chunk=4):
    """Plane marginals of ``(Wa (x) Wb)(Si z)`` over the 4-d lattice.

    ``Wa`` and ``Wb`` are ``(n, n)`` samples at ``(x0 + i hx, y0 + k hy)``;
    ``Si`` acts on ``(x1, x2, xi1, xi2)``.  Returns the unnormalised sums
    ``M1[i1, k1] = sum_{i2, k2}`` and ``M2[i2, k2] = sum_{i1, k1}``.
    """
    Wa = np.asarray(Wa, dtype=complex)
    Wb = np.asarray(Wb, dtype=complex)
    Si = np.asarray(Si, dtype=float)
    n = Wa.shape[0]
    x = x0 + hx * np.arange(n)
    y = y0 + hy * np.arange(n)
    M1 = np.zeros((n, n))
    M2 = np.zeros((n, n))
    for s in range(0, n, chunk):
        x1 = x[s:s + chunk, None, None, None]
        k1 = y[None, :, None, None]
        x2 = x[None, None, :, None]
        k2 = y[None, None, None, :]
        # z ordered (x1, x2, xi1, xi2); lattice axes ordered (i1, k1, i2, k2)
        w = [Si[r, 0] * x1 + Si[r, 1] * x2 + Si[r, 2] * k1 + Si[r, 3] * k2 for r in range(4)]
        va = interp_bilinear(Wa, x0, hx, y0, hy, w[0].ravel(), w[2].ravel())
        vb = interp_bilinear(Wb, x0, hx, y0, hy, w[1].ravel(), w[3].ravel())
        val = (va * vb).real.reshape(w[0].shape)
        M1[s:s + chunk] = val.sum(axis=(2, 3))
        M2 += val.sum(axis=(0, 1))
    return M1, M2
