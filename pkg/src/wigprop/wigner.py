"""Discrete cross-Wigner, tau-Wigner and Rihaczek distributions.

Phase-space samples live on the position grid times the *Wigner frequency
grid* ``xi_k = (k - n/2) / (2 n delta)``, which covers ``[-1/(4 delta),
1/(4 delta))``.  Integer lags ``t = 2 m delta`` keep the core transform free
of interpolation, so inputs must carry their spectral energy in the lower
half of the DFT band.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .grid import GridError, GridSpec, SampledState, _same_grid, band_energy_fraction, inner

BAND_TOL = 1e-6
MAX_WIGNER_2D_N = 64


class BandLimitError(GridError):
    """Input has spectral energy outside the alias-free half band."""


@dataclass(frozen=True)
class PhaseSpaceFunction:
    """Samples on the ``(x, xi)`` lattice of ``grid``.

    ``values`` has shape ``(n,) * 2d`` with all position axes first, then all
    frequency axes.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        shape = (self.grid.n,) * (2 * self.grid.d)
        if vals.shape != shape:
            if vals.size != self.grid.n ** (2 * self.grid.d):
                raise GridError(f"expected shape {shape}, got {vals.shape}")
            vals = vals.reshape(shape)
        object.__setattr__(self, "values", vals)

    @property
    def xi_axis(self) -> np.ndarray:
        return self.grid.wigner_axis

    @property
    def cell(self) -> float:
        """Phase-space cell volume ``(delta * dxi)**d``."""
        return (self.grid.delta * self.grid.wigner_dxi) ** self.grid.d

    def total(self) -> complex:
        return complex(self.cell * self.values.sum())

    def norm(self) -> float:
        return float(np.sqrt(self.cell * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "PhaseSpaceFunction") -> complex:
        if self.grid != other.grid:
            raise GridError("phase-space grids differ")
        return complex(self.cell * np.vdot(other.values, self.values))

    def argmax(self) -> np.ndarray:
        """Phase-space point ``(x..., xi...)`` of the largest modulus."""
        idx = np.unravel_index(np.argmax(np.abs(self.values)), self.values.shape)
        d = self.grid.d
        return np.array([self.grid.axis[i] for i in idx[:d]]
                        + [self.xi_axis[i] for i in idx[d:]])

    def _binop(self, other, op):
        if isinstance(other, PhaseSpaceFunction):
            if self.grid != other.grid:
                raise GridError("phase-space grids differ")
            other = other.values
        return PhaseSpaceFunction(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __mul__(self, c):
        return self._binop(c, np.multiply)

    __rmul__ = __mul__


def _check_band(f: SampledState, name: str = "input") -> None:
    frac = band_energy_fraction(f)
    if frac < 1 - BAND_TOL:
        raise BandLimitError(
            f"{name} has {1 - frac:.2e} of its spectral energy outside |xi| < 1/(4 delta)")


def _lag_transform(C: np.ndarray, delta: float, lag_axes) -> np.ndarray:
    """``2 delta sum_m C[.., m] exp(-2 pi i m (k - n/2) / n)`` over every lag axis."""
    out = C
    for ax in lag_axes:
        n = out.shape[ax]
        sign = np.where(np.arange(n) % 2, -1.0, 1.0)
        shape = [1] * out.ndim
        shape[ax] = n
        out = np.fft.fft(out * sign.reshape(shape), axis=ax) * (2 * delta)
    return out


def _wigner_2var(F: np.ndarray, G: np.ndarray | None, delta: float) -> np.ndarray:
    """Two-variable discrete Wigner in layout ``(x1, x2, xi1, xi2)``.

    ``G is None`` means the auto-Wigner of ``F``.
    """
    n = F.shape[0]
    if n > MAX_WIGNER_2D_N:
        raise MemoryError(f"4d Wigner grids are limited to n <= {MAX_WIGNER_2D_N}, got {n}")
    P = _backend.lag_products_2d(F, F if G is None else G)
    return _lag_transform(P, delta, (2, 3))


def cross_wigner(f: SampledState, g: SampledState, check_band: bool = True) -> PhaseSpaceFunction:
    """Discrete ``W(f, g)(x, xi) = int f(x + t/2) conj g(x - t/2) exp(-2 pi i t xi) dt``.

    Uses integer lags ``t = 2 m delta``, samples outside the grid read as zero.

    Raises
    ------
    GridMismatchError
        If ``f`` and ``g`` live on different grids.
    BandLimitError
        If either state leaks energy above ``1/(4 delta)`` (only when
        ``check_band``).
    """
    _same_grid(f, g)
    if check_band:
        _check_band(f, "f")
        _check_band(g, "g")
    grid = f.grid
    if grid.d == 1:
        C = _backend.lag_products(f.values, g.values)
        return PhaseSpaceFunction(grid, _lag_transform(C, grid.delta, (1,)))
    return PhaseSpaceFunction(grid, _wigner_2var(f.values, g.values, grid.delta))


def wigner(f: SampledState, check_band: bool = True) -> PhaseSpaceFunction:
    """Auto-Wigner ``W(f, f)``; real up to roundoff."""
    return cross_wigner(f, f, check_band)


def partial_wigner(u: SampledState, axis: int, check_band: bool = True) -> PhaseSpaceFunction:
    """Marginal of the full Wigner of a ``d = 2`` state over the other coordinate plane.

    Equals ``int W(u(., y))(x, xi) dy`` (or the transposed variant), i.e. the
    partial Wigner on the ``(x_axis, xi_axis)`` plane.
    """
    if u.grid.d != 2 or axis not in (0, 1):
        raise GridError("partial_wigner expects a d=2 state and axis in (0, 1)")
    if check_band:
        _check_band(u, "u")
    rows = np.moveaxis(u.values, axis, 1)  # (other, this)
    plane = GridSpec(1, u.grid.n, u.grid.delta)
    acc = np.zeros((plane.n, plane.n), dtype=complex)
    for row in rows:
        acc += _backend.lag_products(row, row)
    W = _lag_transform(acc, plane.delta, (1,)) * u.grid.delta
    return PhaseSpaceFunction(plane, W)


def spectral_shift(values: np.ndarray, shifts, delta: float, axis: int = -1,
                   pad: int = 4) -> np.ndarray:
    """Band-limited samples of ``v(x + s)`` for each shift ``s``.

    The signal is zero-padded to ``pad * n`` points (treating it as zero
    outside the grid) and shifted by a Fourier phase ramp.  Integer multiples
    of ``delta`` are reproduced to roundoff.  The result has a leading axis
    over ``shifts``.
    """
    v = np.moveaxis(np.asarray(values, dtype=complex), axis, -1)
    n = v.shape[-1]
    N = pad * n
    lo = (N - n) // 2
    buf = np.zeros(v.shape[:-1] + (N,), dtype=complex)
    buf[..., lo:lo + n] = v
    spec = np.fft.fft(np.fft.ifftshift(buf, axes=-1), axis=-1)
    nu = np.fft.fftfreq(N, d=delta)
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    ramp = np.exp(2j * np.pi * shifts[:, None] * nu[None, :])
    ramp = ramp.reshape((len(shifts),) + (1,) * (v.ndim - 1) + (N,))
    out = np.fft.fftshift(np.fft.ifft(spec[None] * ramp, axis=-1), axes=-1)
    out = out[..., lo:lo + n]
    return np.moveaxis(out, -1, axis if axis < 0 else axis + 1)


def tau_wigner(f: SampledState, g: SampledState, tau: float,
               check_band: bool = True) -> PhaseSpaceFunction:
    """``W_tau(f, g)(x, xi) = int f(x + tau t) conj g(x - (1 - tau) t) exp(-2 pi i t xi) dt``.

    ``tau = 1/2`` is :func:`cross_wigner`, ``tau = 0`` the Rihaczek and
    ``tau = 1`` the conjugate Rihaczek distribution.  Off-lattice samples are
    obtained by band-limited (Fourier) interpolation of each factor.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    _same_grid(f, g)
    if f.grid.d != 1:
        raise GridError("tau_wigner supports d=1 only")
    if check_band:
        _check_band(f, "f")
        _check_band(g, "g")
    n, delta = f.grid.n, f.grid.delta
    m = np.arange(n)
    m = np.where(m < n // 2, m, m - n)  # stored at index m % n
    t = 2 * m * delta
    fs = spectral_shift(f.values, tau * t, delta)
    gs = spectral_shift(g.values, -(1 - tau) * t, delta)
    C = (fs * np.conj(gs)).T  # (position, lag)
    return PhaseSpaceFunction(f.grid, _lag_transform(C, delta, (1,)))


def rihaczek(f: SampledState, g: SampledState, check_band: bool = True) -> PhaseSpaceFunction:
    """``R(f, g)(x, xi) = f(x) conj(g_hat(xi)) exp(-2 pi i x xi)``."""
    return tau_wigner(f, g, 0.0, check_band)


def _check_band_2d(F: np.ndarray) -> None:
    spec = np.abs(np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(F)))) ** 2
    total = spec.sum()
    if total == 0:
        return
    n = F.shape[0]
    inside = np.abs(np.arange(n) - n // 2) < n // 4
    frac = spec[np.ix_(inside, inside)].sum() / total
    if frac < 1 - BAND_TOL:
        raise BandLimitError(f"F has {1 - frac:.2e} of its spectral energy outside the half band")


def a_half_apply(F: np.ndarray, grid: GridSpec, check_band: bool = True) -> PhaseSpaceFunction:
    """Apply the shear ``F(x + t/2, x - t/2)`` followed by the partial Fourier transform in ``t``.

    ``F`` is an ``(n, n)`` array on ``grid x grid`` (``grid.d == 1``).  On
    ``F = f (x) conj(g)`` this reproduces :func:`cross_wigner`.
    """
    F = np.asarray(F, dtype=complex)
    if grid.d != 1 or F.shape != (grid.n, grid.n):
        raise GridError(f"expected an ({grid.n}, {grid.n}) array on a d=1 grid")
    if check_band:
        _check_band_2d(F)
    G = _backend.shear(F)
    return PhaseSpaceFunction(grid, _lag_transform(G, grid.delta, (1,)))


def a_half_inverse(W: PhaseSpaceFunction) -> np.ndarray:
    """Inverse of :func:`a_half_apply` on band-limited, grid-supported data.

    Even-parity pairs ``(a, b)`` come from an inverse DFT over ``xi``; the
    odd-parity pairs sit at half-integer positions and are recovered after a
    spectral half-cell shift of ``W`` along ``x``.
    """
    grid = W.grid
    if grid.d != 1:
        raise GridError("a_half_inverse supports d=1 only")
    n, delta = grid.n, grid.delta
    dxi = grid.wigner_dxi
    half = spectral_shift(W.values, [0.5 * delta], delta, axis=0)[0]

    def lags(Wrows):
        E = np.zeros((n, 2 * n), dtype=complex)
        E[:, (np.arange(n) - n // 2) % (2 * n)] = Wrows
        return np.fft.ifft(E, axis=1) * (2 * n * dxi)  # G(x, l delta) at index l % 2n

    G_int = lags(W.values)
    G_half = lags(half)
    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    s = a + b
    l = (a - b) % (2 * n)
    j = s // 2
    return np.where(s % 2 == 0, G_int[j, l], G_half[j, l])


def moyal_check(f: SampledState, g: SampledState, phi: SampledState,
                gamma: SampledState) -> float:
    """``|<W(f, g), W(phi, gamma)> - <f, phi> conj(<g, gamma>)|``."""
    lhs = cross_wigner(f, g).inner(cross_wigner(phi, gamma))
    rhs = inner(f, phi) * np.conj(inner(g, gamma))
    return float(abs(lhs - rhs))
