"""Kohn-Nirenberg and Weyl quantization and dense discrete Schwartz kernels."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from .grid import GridError, GridSpec, SampledState, band_project, fourier, spike


class SymbolError(ValueError):
    """A symbol could not be evaluated or produced non-finite values."""


@dataclass(frozen=True)
class Symbol:
    """Phase-space symbol ``sigma(x, xi)``.

    ``func`` must broadcast over arrays; for ``d = 2`` it receives tuples
    ``x = (x1, x2)`` and ``xi = (xi1, xi2)`` of equally shaped arrays.
    ``kind`` is ``"potential"`` for symbols depending on ``x`` only,
    ``"multiplier"`` for ``xi`` only, and ``"general"`` otherwise.
    ``admissible`` records the caller's claim that the symbol is smooth with
    bounded derivatives; it is never checked.
    """

    func: Callable
    name: str = "custom"
    kind: str = "general"
    admissible: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("general", "potential", "multiplier"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    def __call__(self, x, xi) -> np.ndarray:
        args = (x if isinstance(x, tuple) else (x,)) + (xi if isinstance(xi, tuple) else (xi,))
        shape = np.broadcast(*args).shape
        try:
            out = self.func(x, xi)
        except Exception as exc:  # user callables fail in arbitrary ways
            raise SymbolError(f"symbol {self.name!r} failed: {exc}") from exc
        out = np.broadcast_to(np.asarray(out, dtype=complex), shape)
        if not np.all(np.isfinite(out)):
            raise SymbolError(f"symbol {self.name!r} returned non-finite values")
        return out

    def potential(self, grid: GridSpec) -> np.ndarray:
        """Values ``V(x)`` on ``grid`` for a potential-type symbol."""
        if self.kind != "potential":
            raise SymbolError(f"symbol {self.name!r} is not a potential")
        if grid.d == 1:
            return self(grid.axis, np.zeros(grid.n))
        X = grid.mesh()
        return self(tuple(X), tuple(np.zeros_like(m) for m in X))

    @classmethod
    def from_samples(cls, grid: GridSpec, values, name: str = "sampled") -> "Symbol":
        """Bilinear interpolant of samples on the Wigner lattice of a ``d = 1`` grid."""
        values = np.asarray(values, dtype=complex)
        if grid.d != 1 or values.shape != (grid.n, grid.n):
            raise SymbolError("sampled symbols need an (n, n) array on a d=1 grid")
        x0, xi0 = grid.axis[0], grid.wigner_axis[0]
        h, hxi = grid.delta, grid.wigner_dxi

        def func(x, xi):
            x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
            out = _backend.interp_bilinear(values, x0, h, xi0, hxi, x.ravel(), xi.ravel())
            return out.reshape(x.shape)

        return cls(func, name=name)


def _coords(x):
    return x if isinstance(x, tuple) else (x,)


def _one():
    return lambda x, xi: 1.0


def _cos_potential(amplitude=1.0, frequency=1.0):
    return lambda x, xi: amplitude * sum(np.cos(2 * np.pi * frequency * c) for c in _coords(x))


def _lorentzian_potential(amplitude=1.0, width=1.0):
    return lambda x, xi: amplitude / (1 + sum(c ** 2 for c in _coords(x)) / width ** 2)


def _gauss_multiplier(scale=1.0):
    return lambda x, xi: np.exp(-np.pi * scale * sum(c ** 2 for c in _coords(xi)))


# name -> (kind, factory(**params) -> callable)
SYMBOL_REGISTRY = {
    "one": ("potential", _one),
    "potential:cos": ("potential", _cos_potential),
    "potential:lorentzian": ("potential", _lorentzian_potential),
    "multiplier:gauss": ("multiplier", _gauss_multiplier),
}


def make_symbol(name: str, **params) -> Symbol:
    """Instantiate a built-in symbol from :data:`SYMBOL_REGISTRY`."""
    try:
        kind, factory = SYMBOL_REGISTRY[name]
    except KeyError:
        raise SymbolError(
            f"unknown symbol {name!r}; known: {sorted(SYMBOL_REGISTRY)}") from None
    return Symbol(factory(**params), name=name, kind=kind, params=dict(params))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense discrete operator; ``entries @ f.values.ravel()`` applies it.

    ``entries`` equals the Schwartz kernel sampled on ``grid x grid`` times
    the cell volume ``delta**d``.
    """

    grid: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        N = self.grid.n ** self.grid.d
        M = np.asarray(self.entries, dtype=complex)
        if M.shape != (N, N):
            raise GridError(f"expected a ({N}, {N}) matrix, got {M.shape}")
        object.__setattr__(self, "entries", M)

    def apply(self, f: SampledState) -> SampledState:
        if f.grid != self.grid:
            raise GridError("operator and state grids differ")
        return SampledState(self.grid, self.entries @ f.values.ravel())

    __call__ = apply

    def kernel(self) -> np.ndarray:
        """Schwartz-kernel samples ``k_T(x_a, y_b)``."""
        return self.entries / self.grid.cell

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, self.entries.conj().T)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.grid != other.grid:
            raise GridError("operator grids differ")
        return OperatorMatrix(self.grid, self.entries @ other.entries)


def _phase_points(grid: GridSpec):
    """Position points, frequency points and their cell weight."""
    fgrid = grid.frequency_grid()
    return grid.points(), fgrid.points(), fgrid.cell


def _split(pts: np.ndarray, d: int):
    return pts[:, 0] if d == 1 else tuple(pts[:, i] for i in range(d))


def kn_apply(sigma: Symbol, f: SampledState, chunk: int = 512) -> SampledState:
    """``sum_xi exp(2 pi i x xi) sigma(x, xi) f_hat(xi) dxi`` at every grid ``x``."""
    grid = f.grid
    d = grid.d
    x, xi, dxi = _phase_points(grid)
    fh = fourier(f).values.ravel() * dxi
    out = np.empty(len(x), dtype=complex)
    for s in range(0, len(x), chunk):
        xs = x[s:s + chunk]
        ph = np.exp(2j * np.pi * (xs @ xi.T))
        xb = _split(np.repeat(xs, len(xi), axis=0), d)
        xib = _split(np.tile(xi, (len(xs), 1)), d)
        sig = sigma(xb, xib).reshape(len(xs), len(xi))
        out[s:s + chunk] = (ph * sig) @ fh
    return SampledState(grid, out)


def kn_kernel(sigma: Symbol, grid: GridSpec) -> OperatorMatrix:
    """Dense matrix of the Kohn-Nirenberg operator, one FFT per row.

    Row ``j`` holds ``delta * dxi * sum_k sigma(x_j, xi_k) exp(-2 pi i xi_k (x_l - x_j))``.
    """
    if grid.d != 1:
        raise GridError("kn_kernel supports d=1 only")
    n = grid.n
    xi = grid.frequency_grid().axis
    sig = sigma(grid.axis[:, None], xi[None, :])
    sign = np.where(np.arange(n) % 2, -1.0, 1.0)
    H = np.fft.fft(sig, axis=1) * sign[None, :] / n  # H[j, q], q = (l - j) mod n
    j = np.arange(n)[:, None]
    l = np.arange(n)[None, :]
    return OperatorMatrix(grid, H[j, (l - j) % n])


def weyl_kernel(sigma: Symbol, grid: GridSpec) -> OperatorMatrix:
    """Dense matrix of the Weyl operator.

    ``k(x, y) = int sigma((x + y)/2, xi) exp(2 pi i (x - y) xi) dxi`` on a
    ``2n``-point frequency grid of spacing ``1/(2 n delta)``, which keeps
    every lag ``x - y`` inside one period.
    """
    if grid.d != 1:
        raise GridError("weyl quantization supports d=1 only")
    n, delta = grid.n, grid.delta
    xi = (np.arange(2 * n) - n) / (2 * n * delta)
    mid = (np.arange(2 * n - 1) - n) * delta / 2  # (x_a + x_b)/2 indexed by a + b
    sig = sigma(mid[:, None], xi[None, :])
    sign = np.where(np.arange(2 * n) % 2, -1.0, 1.0)
    H = np.fft.ifft(sig, axis=1) * sign[None, :]  # (1/2n) sum_k sig_k exp(2 pi i q (k-n)/2n)
    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    # entries = delta * dxi * 2n * H = H
    return OperatorMatrix(grid, H[a + b, (a - b) % (2 * n)])


def weyl_apply(sigma: Symbol, f: SampledState) -> SampledState:
    """Weyl operator of ``sigma`` applied to ``f``."""
    return weyl_kernel(sigma, f.grid).apply(f)


def materialize(op: Callable[[SampledState], SampledState], grid: GridSpec,
                pad: int = 1, band: bool = False) -> OperatorMatrix:
    """Dense matrix of a linear state-to-state map, column ``l`` = ``op(spike_l)``.

    With ``pad > 1`` the operator runs on a grid ``pad`` times wider (same
    spacing) and the matrix is restricted to the central block, so content
    that leaves ``grid`` is dropped instead of wrapping around the periodic
    DFT box.  ``band=True`` sandwiches the operator between half-band
    projections, the natural domain of the discrete Wigner transform.
    """
    if pad < 1:
        raise ValueError("pad must be >= 1")
    work = grid if pad == 1 else GridSpec(grid.d, grid.n * pad, grid.delta)
    proj = band_project if band else (lambda f: f)
    lo = (work.n - grid.n) // 2
    block = (slice(lo, lo + grid.n),) * grid.d
    N = grid.n ** grid.d
    cols = np.empty((N, N), dtype=complex)
    for l, idx in enumerate(np.ndindex(*grid.shape)):
        e = spike(work, tuple(i + lo for i in idx))
        out = proj(op(proj(e)))
        if out.grid != work:
            raise GridError("operator changed the grid")
        cols[:, l] = out.values[block].ravel()
    return OperatorMatrix(grid, cols)


def band_projector(grid: GridSpec) -> OperatorMatrix:
    """Matrix of :func:`~wigprop.grid.band_project`."""
    return materialize(band_project, grid)
