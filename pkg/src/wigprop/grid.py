"""Uniform centred grids, sampled states and the continuum-convention DFT.

Grid points are ``x_j = (j - n/2) * delta`` along every axis.  The Fourier
transform uses the ``exp(-2 pi i x xi)`` convention; its discrete version
lives on the induced frequency grid with spacing ``1 / (n * delta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Malformed grid or state."""


class GridMismatchError(GridError):
    """Two states do not share a grid."""


class SupportError(GridError):
    """A requested state does not fit inside the grid (aliasing risk)."""


@dataclass(frozen=True)
class GridSpec:
    """Centred uniform grid with ``n`` samples of spacing ``delta`` per axis."""

    d: int
    n: int
    delta: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise GridError(f"only d in (1, 2) is supported, got d={self.d}")
        if self.n <= 0 or self.n % 2:
            raise GridError(f"n must be a positive even integer, got {self.n}")
        if not self.delta > 0:
            raise GridError(f"delta must be positive, got {self.delta}")

    @property
    def extent(self) -> float:
        return self.n * self.delta

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.delta

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell(self) -> float:
        """Volume of one grid cell, ``delta**d``."""
        return self.delta ** self.d

    def frequency_grid(self) -> "GridSpec":
        """Grid on which :func:`fourier` returns its samples."""
        return GridSpec(self.d, self.n, 1.0 / (self.n * self.delta))

    @property
    def wigner_axis(self) -> np.ndarray:
        """Frequency samples of phase-space functions (half the DFT band)."""
        return (np.arange(self.n) - self.n // 2) / (2 * self.n * self.delta)

    @property
    def wigner_dxi(self) -> float:
        return 1.0 / (2 * self.n * self.delta)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis] * self.d), indexing="ij")

    def points(self) -> np.ndarray:
        """All grid points as an ``(n**d, d)`` array in row-major order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)


@dataclass(frozen=True)
class SampledState:
    """Complex samples of a wavefunction on ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.n ** self.grid.d:
            raise GridError(
                f"expected {self.grid.n ** self.grid.d} samples, got {vals.size}")
        object.__setattr__(self, "values", vals.reshape(self.grid.shape))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.cell * np.sum(np.abs(self.values) ** 2)))

    def __add__(self, other: "SampledState") -> "SampledState":
        _same_grid(self, other)
        return SampledState(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledState") -> "SampledState":
        _same_grid(self, other)
        return SampledState(self.grid, self.values - other.values)

    def __mul__(self, c) -> "SampledState":
        return SampledState(self.grid, self.values * c)

    __rmul__ = __mul__


def _same_grid(f: SampledState, g: SampledState) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


def make_gaussian(grid: GridSpec, center=(0.0, 0.0), width: float = 1.0) -> SampledState:
    """Unit-norm Gaussian ``exp(-pi ((x-x0)/width)^2) exp(2 pi i xi0 x)``.

    ``center`` is ``(x0, xi0)``; for ``d == 2`` both entries may be
    length-2 sequences.  Raises :class:`SupportError` when six standard
    deviations around the centre leave the position or frequency window.
    """
    if not width > 0:
        raise GridError(f"width must be positive, got {width}")
    x0 = np.broadcast_to(np.asarray(center[0], dtype=float), (grid.d,))
    xi0 = np.broadcast_to(np.asarray(center[1], dtype=float), (grid.d,))
    sx = width / np.sqrt(2 * np.pi)
    sxi = 1.0 / (width * np.sqrt(2 * np.pi))
    half_x = grid.extent / 2
    half_xi = 1.0 / (2 * grid.delta)
    if np.any(np.abs(x0) + 6 * sx > half_x) or np.any(np.abs(xi0) + 6 * sxi > half_xi):
        raise SupportError(
            f"gaussian at {tuple(x0)}, {tuple(xi0)} with width {width} does not fit "
            f"in |x| < {half_x}, |xi| < {half_xi}")
    vals = np.ones(grid.shape, dtype=complex)
    for axis, (a, b) in enumerate(zip(x0, xi0)):
        x = grid.axis
        factor = np.exp(-np.pi * ((x - a) / width) ** 2 + 2j * np.pi * b * x)
        shape = [1] * grid.d
        shape[axis] = grid.n
        vals = vals * factor.reshape(shape)
    vals /= np.sqrt(grid.cell * np.sum(np.abs(vals) ** 2))
    return SampledState(grid, vals)


def spike(grid: GridSpec, index) -> SampledState:
    """State with a single unit sample at ``index`` (flat or tuple)."""
    vals = np.zeros(grid.n ** grid.d, dtype=complex)
    if isinstance(index, tuple):
        index = np.ravel_multi_index(index, grid.shape)
    vals[index] = 1.0
    return SampledState(grid, vals)


def _centered_dft(values: np.ndarray, inverse: bool = False) -> np.ndarray:
    axes = tuple(range(values.ndim))
    shifted = np.fft.ifftshift(values, axes=axes)
    if inverse:
        out = np.fft.ifftn(shifted, axes=axes, norm="forward")
    else:
        out = np.fft.fftn(shifted, axes=axes)
    return np.fft.fftshift(out, axes=axes)


def fourier(f: SampledState) -> SampledState:
    """Discrete ``int f(x) exp(-2 pi i x xi) dx`` on the induced frequency grid.

    Unitary between the position and frequency grids (each with its own cell
    weight).  Applying it twice yields the parity ``f(-x)``.
    """
    out = f.grid.cell * _centered_dft(f.values)
    return SampledState(f.grid.frequency_grid(), out)


def inverse_fourier(fhat: SampledState) -> SampledState:
    """Inverse of :func:`fourier`; ``fhat`` lives on a frequency grid."""
    out = fhat.grid.cell * _centered_dft(fhat.values, inverse=True)
    return SampledState(fhat.grid.frequency_grid(), out)


def inner(f: SampledState, g: SampledState) -> complex:
    """``<f, g> = delta^d sum f conj(g)``, conjugate-linear in ``g``."""
    _same_grid(f, g)
    return complex(f.grid.cell * np.vdot(g.values, f.values))


def band_energy_fraction(f: SampledState) -> float:
    """Fraction of spectral energy inside ``|xi| < 1 / (4 delta)`` on every axis."""
    spec = np.abs(_centered_dft(f.values)) ** 2
    total = spec.sum()
    if total == 0:
        return 1.0
    return float(spec[band_mask(f.grid)].sum() / total)


def band_mask(grid: GridSpec) -> np.ndarray:
    """Boolean mask of DFT frequencies inside the alias-free half band."""
    inside = np.abs(np.arange(grid.n) - grid.n // 2) < grid.n // 4
    mask = inside
    for _ in range(grid.d - 1):
        mask = np.multiply.outer(mask, inside)
    return mask


def band_project(f: SampledState) -> SampledState:
    """Orthogonal projection onto states band-limited to ``|xi| < 1/(4 delta)``."""
    spec = _centered_dft(f.values)
    return SampledState(f.grid, _centered_dft(spec * band_mask(f.grid), inverse=True) / f.values.size)
