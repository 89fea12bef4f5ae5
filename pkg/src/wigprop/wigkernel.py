"""Wigner kernels of operators on L^2(R).

The Wigner kernel ``k`` of ``T`` satisfies ``W(Tf, Tg)(z) = int k(z, w) W(f, g)(w) dw``
and equals the two-variable Wigner transform of the Schwartz kernel ``k_T``
with the second frequency negated.  Values are stored as ``k[x, xi, y, eta]``
on the phase-space lattice of a ``d = 1`` grid, so they need ``n**4`` complex
numbers; ``n`` is capped at :data:`MAX_KERNEL_N`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fio import TypeIFIO
from .grid import GridError, GridSpec
from .quantize import OperatorMatrix
from .symplectic import check_symplectic, inverse
from .wigner import PhaseSpaceFunction, _wigner_2var

MAX_KERNEL_N = 64


class KernelGuardError(MemoryError):
    """Requested kernel exceeds the 4d memory guard."""


def _guard(grid: GridSpec) -> None:
    if grid.d != 1:
        raise GridError("Wigner kernels are implemented for d=1 only")
    if grid.n > MAX_KERNEL_N:
        raise KernelGuardError(
            f"n={grid.n} exceeds the kernel guard n <= {MAX_KERNEL_N} "
            f"({16 * grid.n ** 4 / 2 ** 20:.0f} MiB per kernel)")


@dataclass(frozen=True)
class WignerKernel:
    """Samples ``k[x, xi, y, eta]``; ``S`` optionally records the claimed graph."""

    grid: GridSpec
    values: np.ndarray
    S: np.ndarray | None = None

    def __post_init__(self):
        _guard(self.grid)
        shape = (self.grid.n,) * 4
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != shape:
            raise GridError(f"expected kernel shape {shape}, got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @property
    def cell(self) -> float:
        return self.grid.delta * self.grid.wigner_dxi

    def matrix(self) -> np.ndarray:
        """View as an ``(n^2, n^2)`` matrix indexed by ``(z, w)``."""
        n = self.grid.n
        return self.values.reshape(n * n, n * n)

    def norm(self) -> float:
        return float(np.sqrt(self.cell ** 2 * np.sum(np.abs(self.values) ** 2)))

    def with_graph(self, S) -> "WignerKernel":
        return WignerKernel(self.grid, self.values, np.asarray(S, dtype=float))


def _same(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise GridError(f"grid mismatch: {a} vs {b}")


def kernel_from_operator(kT: OperatorMatrix, S=None) -> WignerKernel:
    """Wigner kernel of a dense discrete operator.

    Computes the two-variable discrete Wigner transform of ``k_T(x, y)`` and
    reorders it to ``k(x, xi, y, eta) = W k_T(x, y, xi, -eta)``.
    """
    grid = kT.grid
    _guard(grid)
    n = grid.n
    W2 = _wigner_2var(kT.kernel(), None, grid.delta)  # (x, y, xi, eta')
    W2 = W2[:, :, :, (-np.arange(n)) % n]  # eta' -> -eta
    return WignerKernel(grid, W2.transpose(0, 2, 1, 3), S)


def apply_kernel(k: WignerKernel, W: PhaseSpaceFunction) -> PhaseSpaceFunction:
    """``int k(z, w) W(w) dw`` as a cell-weighted contraction."""
    _same(k.grid, W.grid)
    n = k.grid.n
    out = k.matrix() @ W.values.ravel() * k.cell
    return PhaseSpaceFunction(k.grid, out.reshape(n, n))


def pairing(k: WignerKernel, A: PhaseSpaceFunction, B: PhaseSpaceFunction) -> complex:
    """``<k, A (x) B> = int int k(z, w) conj(A(z)) conj(B(w)) dz dw``."""
    _same(k.grid, A.grid)
    _same(k.grid, B.grid)
    a = np.conj(A.values.ravel())
    b = np.conj(B.values.ravel())
    return complex(k.cell ** 2 * (a @ (k.matrix() @ b)))


def _lag_window(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Lags ``m`` and the mask of those with ``j +- m`` on the grid, per ``j``."""
    m = np.arange(-(n // 2) + 1, n // 2)
    j = np.arange(n)[:, None]
    ok = (j + m >= 0) & (j + m < n) & (j - m >= 0) & (j - m < n)
    return m, ok


def type1_kernel_direct(T: TypeIFIO, grid: GridSpec, band: bool = True) -> WignerKernel:
    """Wigner kernel of a type-I FIO from its phase and symbol, without ``k_T``.

    For a quadratic phase the kernel is the oscillatory sum

        c^2 sum exp(-2 pi i [t (xi - Phi_x(x, theta)) + s (y - Phi_eta(x, theta))])
            * sigma(x + t/2, theta + s/2) conj(sigma(x - t/2, theta - s/2))

    over position lags ``t = 2 m delta`` and frequency differences
    ``s = theta_1 - theta_2`` of the DFT grid, with ``theta`` their mean and
    ``c = |det A|^{-1/2}`` when the prefactor is on.  The discrete Wigner
    transform only sees lags whose endpoints stay on the grid; in ``y`` this
    turns the delta ``theta = eta`` into a Dirichlet kernel, which is kept so
    that the result is the exact Wigner kernel of the discretised operator.
    Every sum is evaluated directly; no FFT of ``k_T`` is involved.

    ``band=True`` restricts the input frequencies to the alias-free half
    band, i.e. the kernel of ``T`` composed with the band projection.
    """
    _guard(grid)
    phase = T.phase
    if phase.d != 1:
        raise GridError("type1_kernel_direct supports d=1 only")
    n, delta = grid.n, grid.delta
    P, Q, R = (float(mat[0, 0]) for mat in (phase.P, phase.Q, phase.R))
    x = grid.axis
    xi = grid.wigner_axis
    theta = grid.frequency_grid().axis
    dtheta = 1.0 / (n * delta)
    kk = np.arange(n)
    allowed = np.abs(kk - n // 2) < n // 4 if band else np.ones(n, bool)
    m, mwin = _lag_window(n)

    # frequency pairs grouped by their sum K = k1 + k2
    groups = []
    for K in range(2 * n - 1):
        k1 = kk[(K - kk >= 0) & (K - kk < n)]
        k1 = k1[allowed[k1] & allowed[K - k1]]
        if k1.size:
            k2 = K - k1
            groups.append((0.5 * (theta[k1[0]] + theta[k2[0]]), theta[k1], theta[k2]))
    bars = np.array([g[0] for g in groups])
    # y-lag Dirichlet factor: sum_{p valid for l} exp(-4 pi i p delta (bar - eta_q))
    ph = np.exp(-4j * np.pi * delta * m[None, :, None]
                * (bars[:, None, None] - xi[None, None, :]))  # (K, p, q)
    Dp = np.einsum("lp,Kpq->Klq", mwin.astype(float), ph)

    out = np.empty((n, n, n, n), dtype=complex)
    for j in range(n):
        tj = 2 * delta * m[mwin[j]]
        G = np.empty((len(groups), n, n), dtype=complex)
        for i, (bar, th1, th2) in enumerate(groups):
            s = th1 - th2
            Et = np.exp(2j * np.pi * np.outer(P * x[j] + Q * bar - xi, tj))
            Es = np.exp(2j * np.pi * np.outer(Q * x[j] - R * bar - x, s))
            if T.symbol is None:
                G[i] = np.outer(Et.sum(axis=1), Es.sum(axis=1))
            else:
                sig = (T.symbol(x[j] + tj[:, None] / 2, th1[None, :])
                       * np.conj(T.symbol(x[j] - tj[:, None] / 2, th2[None, :])))
                G[i] = Et @ sig @ Es.T
        out[j] = np.einsum("Kal,Klq->alq", G, Dp)
    out *= T.scale ** 2 * (2 * delta) ** 2 * dtheta ** 2
    return WignerKernel(grid, out, phase.S)


def _cell_coords(grid: GridSpec):
    """Phase-space lattice points in cell units, shape ``(n*n, 2)``."""
    n = grid.n
    X, XI = np.meshgrid(grid.axis / grid.delta, grid.wigner_axis / grid.wigner_dxi,
                        indexing="ij")
    return np.stack([X.ravel(), XI.ravel()], axis=1), n


def _preimage_cells(grid: GridSpec, S) -> np.ndarray:
    """``S^{-1} z`` for every lattice ``z``, in cell units."""
    Si = inverse(check_symplectic(S))
    X, XI = np.meshgrid(grid.axis, grid.wigner_axis, indexing="ij")
    pts = np.stack([X.ravel(), XI.ravel()])
    pre = Si @ pts
    return np.stack([pre[0] / grid.delta, pre[1] / grid.wigner_dxi], axis=1)


DEFAULT_RADII = (1, 2, 4, 8)


def graph_concentration(k: WignerKernel, S=None, threshold: float = 1e-6,
                        tolerance_cells: float = 1.0, margin: int | None = None,
                        radii=DEFAULT_RADII) -> dict:
    """Diagnostics of how tightly ``k`` concentrates on the graph ``{z = S w}``.

    A column ``z`` is *significant* when its largest modulus is at least
    ``threshold`` times the global maximum and ``S^{-1} z`` lies inside the
    ``w`` lattice.  It is a *hit* when the argmax over ``w`` of ``|k(z, w)|``
    is within ``tolerance_cells`` (max-norm, in grid cells) of ``S^{-1} z``.

    Near the lattice boundary the Wigner lag windows are truncated and the
    graph is not resolved, so the headline rate only counts significant
    columns with both ``z`` and ``S^{-1} z`` at least ``margin`` cells inside
    the lattice (default ``n // 8``).  The rate over all significant columns
    is reported as ``argmax_hit_rate_all``.

    Returns
    -------
    dict
        ``argmax_hit_rate``, ``argmax_hit_rate_all``, ``significant`` and
        ``interior`` (column counts), ``mass_profile`` (fraction of
        ``sum |k|^2`` at graph distance greater than each radius in cells),
        ``offgraph_decay_exponent_fit`` (slope of log mass density against
        log ``<distance>``).
    """
    if S is None:
        S = k.S
    if S is None:
        raise ValueError("no symplectic matrix given or attached to the kernel")
    grid = k.grid
    n = grid.n
    if margin is None:
        margin = n // 8
    A = np.abs(k.matrix())
    pre = _preimage_cells(grid, S)
    w_cells, _ = _cell_coords(grid)
    lo, hi = w_cells.min(axis=0), w_cells.max(axis=0)
    inside = np.all((pre >= lo) & (pre <= hi), axis=1)
    interior = (np.all((pre >= lo + margin) & (pre <= hi - margin), axis=1)
                & np.all((w_cells >= lo + margin) & (w_cells <= hi - margin), axis=1))
    colmax = A.max(axis=1)
    significant = inside & (colmax >= threshold * colmax.max())
    arg = A.argmax(axis=1)
    dist = np.max(np.abs(w_cells[arg] - pre), axis=1)
    hit = dist <= tolerance_cells

    def rate(mask):
        return float(hit[mask].mean()) if mask.any() else float("nan")

    # radial mass profile around the graph
    mass = A ** 2
    total = mass.sum()
    profile = {}
    edges = np.arange(0, 2 * n + 1.0)
    hist = np.zeros(len(edges) - 1)
    for s in range(0, n * n, 256):
        e = slice(s, s + 256)
        d = np.linalg.norm(pre[e, None, :] - w_cells[None, :, :], axis=2)
        hist += np.histogram(d, bins=edges, weights=mass[e])[0]
        for R in radii:
            profile[R] = profile.get(R, 0.0) + float(mass[e][d > R].sum())
    profile = {R: float(v / total) for R, v in profile.items()} if total else profile
    centres = 0.5 * (edges[1:] + edges[:-1])
    shell = 2 * np.pi * centres
    density = hist / shell
    use = (centres > 1) & (density > 0)
    slope = float("nan")
    if use.sum() >= 2:
        slope = float(np.polyfit(np.log(np.sqrt(1 + centres[use] ** 2)),
                                 np.log(density[use]), 1)[0])
    return {
        "argmax_hit_rate": rate(significant & interior),
        "argmax_hit_rate_all": rate(significant),
        "significant": int(significant.sum()),
        "interior": int((significant & interior).sum()),
        "mass_profile": profile,
        "offgraph_decay_exponent_fit": slope,
    }


def compose_kernels(k1: WignerKernel, k2: WignerKernel) -> WignerKernel:
    """``k(z, u) = int k1(z, w) k2(w, u) dw``; graph is ``S1 S2`` when both are known."""
    _same(k1.grid, k2.grid)
    n = k1.grid.n
    vals = (k1.matrix() @ k2.matrix()) * k1.cell
    S = k1.S @ k2.S if k1.S is not None and k2.S is not None else None
    return WignerKernel(k1.grid, vals.reshape((n,) * 4), S)


def adjoint_kernel(k: WignerKernel) -> WignerKernel:
    """Swap the ``z`` and ``w`` blocks; the Wigner kernel of ``T*``."""
    S = inverse(k.S) if k.S is not None else None
    return WignerKernel(k.grid, k.values.transpose(2, 3, 0, 1), S)
