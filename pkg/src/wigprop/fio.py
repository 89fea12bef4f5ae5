"""Fourier integral operators with quadratic phases and metaplectic operators.

A symplectic ``S = [[A, B], [C, D]]`` with ``det A != 0`` generates the phase

    Phi(x, eta) = x.P x / 2 + eta.Q x - eta.R eta / 2,
    P = C A^{-1},  Q = A^{-1},  R = A^{-1} B,

whose type-I operator ``|det A|^{-1/2} int exp(2 pi i Phi(x, eta)) f_hat(eta) deta``
is the metaplectic operator of ``S`` (up to a global sign).  The discrete
versions below are direct oscillatory sums over the DFT frequency grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .grid import GridSpec, SampledState, fourier, inverse_fourier
from .quantize import Symbol
from .symplectic import blocks, check_symplectic, standard_J

CAUSTIC_TOL = 1e-8


class CausticError(ValueError):
    """``|det A|`` falls below the caustic tolerance; no type-I representation."""

    def __init__(self, det_a: float, tol: float):
        super().__init__(f"caustic: |det A| = {abs(det_a):.3e} < {tol:.1e}")
        self.det_a = det_a
        self.tol = tol


class DoubleCausticError(CausticError):
    """Both ``S`` and ``S J^{-1}`` are caustic."""


@dataclass(frozen=True)
class QuadraticPhase:
    """Quadratic phase generated by a non-caustic symplectic matrix."""

    S: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    det_a: float
    delta_c: float = CAUSTIC_TOL

    @property
    def d(self) -> int:
        return self.Q.shape[0]

    def __call__(self, x, eta) -> np.ndarray:
        """``Phi`` at points ``x`` and ``eta`` of shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        eta = np.asarray(eta, dtype=float)
        xPx = np.einsum("...i,ij,...j->...", x, self.P, x)
        eQx = np.einsum("...i,ij,...j->...", eta, self.Q, x)
        eRe = np.einsum("...i,ij,...j->...", eta, self.R, eta)
        return 0.5 * xPx + eQx - 0.5 * eRe

    def grad_x(self, x, eta) -> np.ndarray:
        """``Phi_x = C A^{-1} x + A^{-T} eta``."""
        return np.asarray(x) @ self.P.T + np.asarray(eta) @ self.Q

    def grad_eta(self, x, eta) -> np.ndarray:
        """``Phi_eta = A^{-1} x - A^{-1} B eta``."""
        return np.asarray(x) @ self.Q.T - np.asarray(eta) @ self.R.T


def phase_from_symplectic(S, delta_c: float = CAUSTIC_TOL) -> QuadraticPhase:
    """Phase of the type-I representation of ``S``.

    Raises
    ------
    CausticError
        When ``|det A| < delta_c``; carries ``det A``.
    """
    S = check_symplectic(S)
    A, B, C, _ = blocks(S)
    det_a = float(np.linalg.det(A))
    if abs(det_a) < delta_c:
        raise CausticError(det_a, delta_c)
    Q = np.linalg.inv(A)
    P = C @ Q
    R = Q @ B
    # symmetric by symplecticity; remove roundoff asymmetry
    P = 0.5 * (P + P.T)
    R = 0.5 * (R + R.T)
    return QuadraticPhase(S, P, Q, R, det_a, delta_c)


def canonical_map_from_phase(phi: QuadraticPhase) -> np.ndarray:
    """Solve ``y = Phi_eta(x, eta)``, ``xi = Phi_x(x, eta)`` for ``(x, xi) = S (y, eta)``."""
    A = np.linalg.inv(phi.Q)
    B = A @ phi.R
    C = phi.P @ A
    D = phi.P @ B + phi.Q.T
    return np.block([[A, B], [C, D]])


@dataclass(frozen=True)
class TypeIFIO:
    """``f -> c int exp(2 pi i Phi(x, eta)) sigma(x, eta) f_hat(eta) deta``.

    ``symbol=None`` means ``sigma = 1``; ``prefactor`` toggles
    ``c = |det A|^{-1/2}`` (else ``c = 1``).
    """

    phase: QuadraticPhase
    symbol: Symbol | None = None
    prefactor: bool = True

    @property
    def scale(self) -> float:
        return abs(self.phase.det_a) ** -0.5 if self.prefactor else 1.0


def _amplitude(symbol: Symbol | None, x: np.ndarray, eta: np.ndarray):
    if symbol is None:
        return None
    d = x.shape[1]
    if d == 1:
        return symbol(x[:, 0][:, None], eta[:, 0][None, :])
    X = tuple(x[:, i][:, None] for i in range(d))
    E = tuple(eta[:, i][None, :] for i in range(d))
    return symbol(X, E)


def _sum(phase: QuadraticPhase, x, eta, amp, coeff, adjoint=False):
    return _backend.type1_sum(x, eta, phase.P, phase.Q, phase.R, amp, coeff, adjoint)


def _zero_pad(f: SampledState, factor: int) -> SampledState:
    """Embed ``f`` in the centre of a grid ``factor`` times wider."""
    grid = f.grid
    wide = GridSpec(grid.d, grid.n * factor, grid.delta)
    lo = (wide.n - grid.n) // 2
    vals = np.zeros(wide.shape, dtype=complex)
    vals[(slice(lo, lo + grid.n),) * grid.d] = f.values
    return SampledState(wide, vals)


def apply_type1(T: TypeIFIO, f: SampledState, oversample: int = 1) -> SampledState:
    """Direct oscillatory sum over the full frequency grid of ``f``.

    ``oversample > 1`` zero-pads ``f`` first, refining the frequency
    quadrature by that factor over the same band.  A coarse quadrature
    aliases the output by translations ``A k / d_eta``; with a rotating
    ``A`` these can land inside the grid.  ``oversample=1`` keeps
    :func:`apply_type2` the exact discrete adjoint.
    """
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    grid = f.grid
    fh = fourier(f if oversample == 1 else _zero_pad(f, oversample))
    x = grid.points()
    eta = fh.grid.points()
    amp = _amplitude(T.symbol, x, eta)
    out = _sum(T.phase, x, eta, amp, fh.values.ravel() * fh.grid.cell)
    return SampledState(grid, T.scale * out)


def apply_type2(T: TypeIFIO, g: SampledState) -> SampledState:
    """Exact discrete adjoint of :func:`apply_type1`.

    ``h(eta) = c sum_x exp(-2 pi i Phi(x, eta)) conj(sigma(x, eta)) g(x) dx``
    followed by the inverse Fourier transform.
    """
    grid = g.grid
    fgrid = grid.frequency_grid()
    x = grid.points()
    eta = fgrid.points()
    amp = _amplitude(T.symbol, x, eta)
    h = _sum(T.phase, x, eta, amp, g.values.ravel() * grid.cell, adjoint=True)
    return inverse_fourier(SampledState(fgrid, T.scale * h))


MAX_OVERSAMPLE = 8


def _upsample(f: SampledState, factor: int) -> SampledState:
    """Band-limited interpolation of ``f`` onto a grid ``factor`` times finer."""
    grid = f.grid
    fine = GridSpec(grid.d, grid.n * factor, grid.delta / factor)
    lo = (fine.n - grid.n) // 2
    spec = np.zeros(fine.shape, dtype=complex)
    spec[(slice(lo, lo + grid.n),) * grid.d] = fourier(f).values
    return inverse_fourier(SampledState(fine.frequency_grid(), spec))


def _smin(M: np.ndarray) -> float:
    return float(np.linalg.svd(M, compute_uv=False).min())


def _auto_oversample(ratio: float) -> int:
    """Smallest factor pushing quadrature aliases a full window away."""
    if ratio <= 0:
        return MAX_OVERSAMPLE
    return int(min(MAX_OVERSAMPLE, max(1, math.ceil(1.0 / ratio - 1e-9))))


def metaplectic_apply(S, f: SampledState, delta_c: float = CAUSTIC_TOL,
                      oversample: int | None = None) -> SampledState:
    """Metaplectic operator of ``S`` applied to ``f``, defined for every symplectic ``S``.

    Two representations are available.  The type-I operator of ``S`` sums
    over frequencies; alternatively ``S = (S J^{-1}) J`` with the Fourier
    transform realising ``J``, and the type-I operator of ``S J^{-1}``
    applied to ``f_hat`` collapses to

        |det B|^{-1/2} int exp(2 pi i Phi'(x, -y)) f(y) dy

    summed over positions (``B`` is the upper-right block of ``S``, the
    ``A`` block of ``S J^{-1}``).  The representation whose block has the
    larger smallest singular value is used, so caustics ``det A = 0`` are
    never approached.  Trapezoidal quadrature replicates the output at
    shifts ``A k n delta o`` (resp. ``B k o / delta``); with
    ``oversample=None`` the refinement ``o`` is chosen so these replicas
    clear the grid window, capped at :data:`MAX_OVERSAMPLE`.

    The branch of ``(det A)^{-1/2}`` is fixed to ``|det A|^{-1/2}``.  When
    ``det A != 0`` the second representation is multiplied by the Fresnel
    constant ``exp(-i pi sgn(A^{-1} B) / 4)``, so both agree with the
    type-I operator exactly; at caustics the result is defined up to a
    constant unimodular factor.

    Raises
    ------
    DoubleCausticError
        If both blocks are singular to within ``delta_c``.
    """
    S = check_symplectic(S)
    d = S.shape[0] // 2
    grid = f.grid
    A, B, _, _ = blocks(S)
    sa, sb = _smin(A), _smin(B)
    if sa >= sb:
        phase = phase_from_symplectic(S, delta_c) if abs(np.linalg.det(A)) >= delta_c else None
        if phase is not None:
            o = oversample or _auto_oversample(sa)
            return apply_type1(TypeIFIO(phase), f, o)
    J = standard_J(d)
    try:
        phase = phase_from_symplectic(S @ -J, delta_c)
    except CausticError:
        raise DoubleCausticError(float(np.linalg.det(A)), delta_c) from None
    o = oversample or _auto_oversample(sb / (grid.n * grid.delta ** 2))
    fine = f if o == 1 else _upsample(f, o)
    x = grid.points()
    y = fine.grid.points()
    out = _sum(phase, x, -y, None, fine.values.ravel() * fine.grid.cell)
    out *= abs(phase.det_a) ** -0.5
    if abs(np.linalg.det(A)) >= delta_c:
        # Fresnel constant of the eta-integral: match the type-I convention exactly
        R = phase_from_symplectic(S, delta_c).R
        out *= np.exp(-0.25j * np.pi * _signature(R))
    return SampledState(grid, out)


def _signature(R: np.ndarray) -> int:
    ev = np.linalg.eigvalsh(R)
    tol = 1e-12 * max(1.0, float(np.abs(ev).max()))
    return int((ev > tol).sum() - (ev < -tol).sum())
