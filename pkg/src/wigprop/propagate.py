"""Schrodinger evolution for quadratic Hamiltonians plus bounded perturbations.

``u(t) = exp(i t H) u0`` with ``H = a(x, D) + sigma(x, D)``.  The quadratic
part is applied exactly as the metaplectic operator of the flow ``S_t``;
perturbations enter through Strang splitting.  The Wigner picture of the
quadratic evolution is transport, ``W(u(t)) = W(u0) o S_t^{-1}``, which stays
valid at caustic times where the type-I representation breaks down.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.optimize

from . import _backend
from .fio import CausticError, metaplectic_apply, phase_from_symplectic
from .grid import GridError, GridSpec, SampledState, inner
from .quantize import Symbol, kn_apply
from .symplectic import (blocks, check_symplectic, exp_flow, free_particle_flow, harmonic_flow,
                         inverse, magnetic_flow)
from .wigner import PhaseSpaceFunction, partial_wigner, wigner

MASS_LOSS_TOL = 1e-3
NORM_DRIFT_TOL = 1e-4
MAX_STEPS = 1_000_000


class NormDriftWarning(RuntimeWarning):
    """Splitting lost unitarity beyond the drift tolerance."""


class MassLossWarning(RuntimeWarning):
    """Transport pushed Wigner mass off the lattice."""


@dataclass(frozen=True)
class Flow:
    """Linear Hamiltonian flow ``t -> S_t``.

    ``kind`` is ``"harmonic"``, ``"free"``, ``"magnetic"`` (params ``m``,
    ``omega``, ``B``) or ``"generator"`` (param ``X``).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("harmonic", "free", "magnetic", "generator"):
            raise ValueError(f"unknown flow {self.kind!r}")
        if self.kind == "generator" and "X" not in self.params:
            raise ValueError("generator flow needs params['X']")

    def matrix(self, t: float, d: int = 1) -> np.ndarray:
        p = self.params
        if self.kind == "harmonic":
            return harmonic_flow(t, d)
        if self.kind == "free":
            return free_particle_flow(t, d)
        if self.kind == "magnetic":
            B = np.asarray(p.get("B", [[0.0, 1.0], [-1.0, 0.0]]), dtype=float)
            if 2 * d != 2 * len(B):
                raise GridError("magnetic flow requires d == 2")
            return magnetic_flow(t, p.get("m", 1.0), p.get("omega", 1.0), B)
        return exp_flow(np.asarray(p["X"], dtype=float), t)

    def det_a(self, t: float, d: int = 1) -> float:
        return float(np.linalg.det(blocks(self.matrix(t, d)).A))


@dataclass
class CauchyProblem:
    """Initial-value problem ``i u_t + (a(x, D) + sigma(x, D)) u = 0``, ``u(0) = u0``."""

    flow: Flow
    u0: SampledState
    times: list
    perturbation: Symbol | None = None
    dt: float | None = None
    oversample: int | None = None

    def __post_init__(self):
        self.times = [float(t) for t in self.times]
        if not all(math.isfinite(t) for t in self.times):
            raise ValueError("times must be finite")
        if self.flow.kind == "magnetic" and self.u0.grid.d != 2:
            raise GridError("magnetic flow requires d == 2")
        if self.dt is None:
            pts = sorted({0.0, *self.times})
            gaps = [b - a for a, b in zip(pts, pts[1:]) if b > a]
            self.dt = (min(gaps) if gaps else 1.0) / 64
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def d(self) -> int:
        return self.u0.grid.d

    def S(self, t: float) -> np.ndarray:
        return self.flow.matrix(t, self.d)


def evolve_quadratic(p: CauchyProblem, t: float) -> SampledState:
    """``u(t) = metaplectic(S_t) u0``; defined at every ``t`` including caustics."""
    return metaplectic_apply(p.S(t), p.u0, oversample=p.oversample)


def _potential_step(sigma: Symbol, tau: float) -> Callable:
    """``exp(i tau sigma)`` exactly for potentials, else ``I + i tau sigma(x, D)``."""
    if sigma.kind == "potential":
        cache: dict = {}

        def step(f: SampledState) -> SampledState:
            if f.grid not in cache:
                cache[f.grid] = np.exp(1j * tau * sigma.potential(f.grid))
            return SampledState(f.grid, cache[f.grid] * f.values)

        return step
    return lambda f: f + 1j * tau * kn_apply(sigma, f)


def perturbed_propagator(flow: Flow, sigma: Symbol | None, t: float, dt: float,
                         oversample: int | None = None) -> Callable[[SampledState], SampledState]:
    """Strang-splitting approximation of ``exp(i t H)`` as a state map.

    Each step is a half perturbation step, one exact metaplectic step over
    ``dt`` and another half perturbation step; adjacent half steps are fused.
    The map works on states of any grid with the dimension of ``flow``.
    """
    if sigma is None:
        return lambda f: metaplectic_apply(flow.matrix(t, f.grid.d), f, oversample=oversample)
    steps = max(1, math.ceil(abs(t) / dt - 1e-12))
    if steps > MAX_STEPS:
        raise OverflowError(f"{steps} splitting steps exceed the limit {MAX_STEPS}")
    h = t / steps
    half = _potential_step(sigma, h / 2)
    full = _potential_step(sigma, h) if sigma.kind == "potential" else None

    def apply(f: SampledState) -> SampledState:
        S = flow.matrix(h, f.grid.d)
        f = half(f)
        for i in range(steps):
            f = metaplectic_apply(S, f, oversample=oversample)
            if i < steps - 1:
                f = full(f) if full is not None else half(half(f))
        return half(f)

    return apply


def evolve_perturbed(p: CauchyProblem, t: float, dt: float | None = None) -> SampledState:
    """Strang-splitting reference solution for the perturbed Hamiltonian.

    Exact sub-steps need a potential ``V(x)``; other symbols use a first-order
    ``I + i dt sigma(x, D)`` step.  Warns with :class:`NormDriftWarning` when
    the norm drifts by more than ``1e-4``.
    """
    if p.perturbation is None:
        return evolve_quadratic(p, t)
    if p.perturbation.kind != "potential":
        warnings.warn("non-potential perturbation: first-order splitting", stacklevel=2)
    u = perturbed_propagator(p.flow, p.perturbation, t, dt or p.dt, p.oversample)(p.u0)
    n0, n1 = p.u0.norm(), u.norm()
    if abs(n1 - n0) > NORM_DRIFT_TOL * max(n0, 1e-300):
        warnings.warn(f"norm drifted from {n0:.6g} to {n1:.6g}", NormDriftWarning, stacklevel=2)
    return u


def transport_wigner(W0: PhaseSpaceFunction, S) -> PhaseSpaceFunction:
    """``W0(S^{-1} z)`` on the lattice of ``W0`` by bilinear interpolation.

    Points whose preimage leaves the lattice read zero; a
    :class:`MassLossWarning` is issued when more than ``1e-3`` of the total
    mass is lost (see :func:`mass_loss`).
    """
    grid = W0.grid
    if grid.d != 1:
        raise GridError("transport_wigner works on d=1 phase space; use transport_marginals")
    Si = inverse(check_symplectic(S))
    X, XI = np.meshgrid(grid.axis, grid.wigner_axis, indexing="ij")
    px = Si[0, 0] * X + Si[0, 1] * XI
    pxi = Si[1, 0] * X + Si[1, 1] * XI
    vals = _backend.interp_bilinear(W0.values, grid.axis[0], grid.delta,
                                    grid.wigner_axis[0], grid.wigner_dxi,
                                    px.ravel(), pxi.ravel())
    out = PhaseSpaceFunction(grid, vals.reshape(X.shape))
    loss = mass_loss(W0, out)
    if loss > MASS_LOSS_TOL:
        warnings.warn(f"transport lost {loss:.2e} of the Wigner mass", MassLossWarning,
                      stacklevel=2)
    return out


def mass_loss(W0: PhaseSpaceFunction, W1: PhaseSpaceFunction) -> float:
    """Relative change of the total mass ``int W``."""
    m0 = W0.total().real
    return float(abs(m0 - W1.total().real) / abs(m0)) if m0 else 0.0


def transport_marginals(Wa: PhaseSpaceFunction, Wb: PhaseSpaceFunction,
                        S) -> tuple[PhaseSpaceFunction, PhaseSpaceFunction]:
    """Coordinate-plane marginals of ``(Wa (x) Wb) o S^{-1}`` for ``d = 2``.

    ``Wa`` and ``Wb`` are the Wigner functions of the two factors of a product
    state ``u0(x1, x2) = a(x1) b(x2)``, so the full ``d = 2`` Wigner function
    never has to be stored.  ``S`` acts on ``(x1, x2, xi1, xi2)``.
    """
    if Wa.grid != Wb.grid:
        raise GridError("factor grids differ")
    grid = Wa.grid
    Si = inverse(check_symplectic(S))
    if Si.shape != (4, 4):
        raise ValueError("S must be 4x4")
    cell = grid.delta * grid.wigner_dxi
    M1, M2 = _backend.transport_marginals(Wa.values, Wb.values, Si, grid.axis[0], grid.delta,
                                          grid.wigner_axis[0], grid.wigner_dxi)
    return PhaseSpaceFunction(grid, M1 * cell), PhaseSpaceFunction(grid, M2 * cell)


def _product_factors(u: SampledState) -> tuple[SampledState, SampledState]:
    """Split a rank-one ``d = 2`` state into its two ``d = 1`` factors."""
    U, s, Vh = np.linalg.svd(u.values)
    if s[0] == 0 or (s[1:] ** 2).sum() > 1e-20 * s[0] ** 2:
        raise GridError("d=2 transport needs a product initial state")
    line = GridSpec(1, u.grid.n, u.grid.delta)
    a = U[:, 0] * np.sqrt(s[0])
    b = Vh[0] * np.sqrt(s[0])
    return SampledState(line, a), SampledState(line, b)


def caustic_times(flow: Flow, window, d: int = 1, step: float = 1e-3,
                  tol: float = 1e-10, delta_c: float = 1e-8) -> list[float]:
    """Zeros of ``det A(t)`` in ``window = [t0, t1]``.

    Sign changes on a ``step``-spaced scan are refined by bracketing root
    search to ``tol``.  Even-order zeros (``det A`` touching zero, as for the
    uniform magnetic field) are located as sign changes of the derivative at
    local minima of ``|det A|`` and kept when ``|det A| < delta_c`` there.
    """
    t0, t1 = (float(v) for v in window)
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise ValueError("window must be a finite interval")
    ts = np.linspace(t0, t1, max(2, int(round((t1 - t0) / step)) + 1))
    f = np.array([flow.det_a(t, d) for t in ts])
    roots: list[float] = []
    g = lambda t: flow.det_a(t, d)
    for i in range(len(ts) - 1):
        if f[i] == 0:
            roots.append(float(ts[i]))
        elif f[i] * f[i + 1] < 0:
            roots.append(float(scipy.optimize.brentq(g, ts[i], ts[i + 1], xtol=tol)))
    if f[-1] == 0:
        roots.append(float(ts[-1]))
    a = np.abs(f)
    eps = 1e-6
    dg = lambda t: (g(t + eps) - g(t - eps)) / (2 * eps)
    for i in range(1, len(ts) - 1):
        if a[i] <= a[i - 1] and a[i] <= a[i + 1] and f[i - 1] * f[i + 1] > 0:
            lo, hi = ts[i - 1], ts[i + 1]
            if dg(lo) * dg(hi) >= 0:
                continue
            r = float(scipy.optimize.brentq(dg, lo, hi, xtol=tol))
            if abs(g(r)) < delta_c:
                roots.append(r)
    roots = sorted(roots)
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 10 * tol:
            merged.append(r)
    return merged


@dataclass
class TimeSlice:
    t: float
    u: SampledState
    S: np.ndarray
    det_a: float
    type1_ok: bool
    norm: float
    wigner: tuple  # one PhaseSpaceFunction (d=1) or two partial ones (d=2)
    transported: tuple


@dataclass
class PropagationResult:
    problem: CauchyProblem
    slices: list

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.slices]


def propagate(p: CauchyProblem, with_wigner: bool = True) -> PropagationResult:
    """Evolve to every output time and collect Wigner-level data.

    For ``d = 2`` the Wigner data are the two coordinate-plane partial
    Wigner functions, and the transported side needs a product ``u0``.
    """
    d = p.d
    slices = []
    if with_wigner:
        if d == 1:
            W0 = wigner(p.u0)
        else:
            a, b = _product_factors(p.u0)
            Wa, Wb = wigner(a), wigner(b)
    for t in p.times:
        S = p.S(t)
        u = evolve_perturbed(p, t) if p.perturbation is not None else evolve_quadratic(p, t)
        try:
            phase_from_symplectic(S)
            ok = True
        except CausticError:
            ok = False
        W, Wt = (), ()
        if with_wigner:
            if d == 1:
                W, Wt = (wigner(u, check_band=False),), (transport_wigner(W0, S),)
            else:
                W = (partial_wigner(u, 0, check_band=False), partial_wigner(u, 1, check_band=False))
                Wt = transport_marginals(Wa, Wb, S)
        slices.append(TimeSlice(t, u, S, float(np.linalg.det(blocks(S).A)), ok, u.norm(), W, Wt))
    return PropagationResult(p, slices)


def wigner_gap(W: PhaseSpaceFunction, Wt: PhaseSpaceFunction) -> float:
    """Relative L2 gap ``||W - Wt|| / ||W||``."""
    return float((W - Wt).norm() / W.norm())


def compare(run: PropagationResult) -> dict:
    """Per-time Wigner gaps between evolved and transported states.

    Returns a report with one record per time (``t``, ``det_a``,
    ``type1_failed``, ``norm``, ``wigner_gap`` or ``partial_gaps`` for
    ``d = 2``) plus ``max_gap`` and ``spike_ratio`` (max over median gap).
    """
    records = []
    gaps = []
    for s in run.slices:
        rec = {"t": s.t, "det_a": s.det_a, "type1_failed": not s.type1_ok, "norm": s.norm}
        if s.wigner:
            parts = [wigner_gap(W, Wt) for W, Wt in zip(s.wigner, s.transported)]
            if len(parts) == 1:
                rec["wigner_gap"] = parts[0]
            else:
                rec["partial_gaps"] = parts
            gaps.append(max(parts))
        records.append(rec)
    report = {"records": records}
    if gaps:
        med = float(np.median(gaps))
        report["max_gap"] = float(max(gaps))
        report["spike_ratio"] = float(max(gaps) / med) if med > 0 else float("inf")
    return report


def overlap_phase(u: SampledState, v: SampledState) -> float:
    """``1 - |<u, v>| / (||u|| ||v||)``: zero iff ``u`` and ``v`` agree up to a phase."""
    return float(1 - abs(inner(u, v)) / (u.norm() * v.norm()))
