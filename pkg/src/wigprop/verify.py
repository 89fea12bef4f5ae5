"""Acceptance suites shared by ``wigprop verify`` and the test-suite.

Each suite returns a :class:`CriterionResult` made of named checks against
fixed thresholds plus a wall-clock budget.  ``tolerance_scale`` multiplies
error tolerances and time budgets (slow CI machines); lower bounds on rates
are never relaxed.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fio import CausticError, TypeIFIO, apply_type1, metaplectic_apply, phase_from_symplectic
from .grid import GridSpec, SampledState, band_project, make_gaussian
from .propagate import CauchyProblem, Flow, compare, perturbed_propagator, propagate
from .quantize import OperatorMatrix, band_projector, make_symbol, materialize
from .symplectic import (blocks, exp_flow, free_particle_flow, ft2_conjugation, harmonic_flow,
                         magnetic_flow, magnetic_generator)
from .wigkernel import (compose_kernels, graph_concentration, kernel_from_operator, pairing,
                        type1_kernel_direct)
from .wigner import PhaseSpaceFunction, cross_wigner, moyal_check, wigner


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    kind: str = "max"  # "max": value <= threshold, "min": value >= threshold

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value <= self.threshold if self.kind == "max" else self.value >= self.threshold

    def describe(self) -> str:
        rel = "<=" if self.kind == "max" else ">="
        return f"{self.name}={self.value:.3g} ({rel} {self.threshold:.3g})"


@dataclass
class CriterionResult:
    number: int
    suite: str
    title: str
    checks: list = field(default_factory=list)
    runtime: float = 0.0
    budget: float = math.inf

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and self.runtime < self.budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = "; ".join(c.describe() for c in self.checks)
        return (f"{status} [{self.number}] {self.title}: {parts}; "
                f"runtime={self.runtime:.2f}s (< {self.budget:.3g}s)")

    def failures(self) -> list[str]:
        out = [c.describe() for c in self.checks if not c.passed]
        if self.runtime >= self.budget:
            out.append(f"runtime={self.runtime:.2f}s (< {self.budget:.3g}s)")
        return out

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "suite": self.suite,
            "title": self.title,
            "passed": self.passed,
            "checks": [{"name": c.name, "value": c.value if math.isfinite(c.value) else None,
                        "threshold": c.threshold, "kind": c.kind, "passed": c.passed}
                       for c in self.checks],
            "runtime": self.runtime,
            "budget": self.budget,
        }


def random_band_state(grid: GridSpec, rng: np.random.Generator) -> SampledState:
    """Unit-norm random state projected onto the half band."""
    vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    f = band_project(SampledState(grid, vals))
    return f * (1.0 / f.norm())


def random_band_operator(grid: GridSpec, rng: np.random.Generator, P=None) -> OperatorMatrix:
    """Random dense operator sandwiched between half-band projections."""
    P = band_projector(grid).entries if P is None else P
    N = grid.n ** grid.d
    M = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return OperatorMatrix(grid, P @ M @ P)


def metaplectic_kernel(S, grid: GridSpec):
    """Wigner kernel of the materialised metaplectic operator of ``S``."""
    op = materialize(lambda f: metaplectic_apply(S, f), grid, pad=2, band=True)
    return kernel_from_operator(op, S)


def square_grid(n: int) -> GridSpec:
    """Grid whose position and Wigner-frequency spacings coincide."""
    return GridSpec(1, n, 1 / math.sqrt(2 * n))


# -- suites -----------------------------------------------------------------

def suite_symplectic(rng, scale) -> list[Check]:
    ts = np.linspace(-10, 10, 101)
    err_h = 0.0
    for t in ts:
        c, s = math.cos(t), math.sin(t)
        err_h = max(err_h, float(np.abs(harmonic_flow(t) - np.array([[c, -s], [s, c]])).max()))
    B = np.array([[0.0, 1.0], [-1.0, 0.0]])
    err_m = 0.0
    ident = 0.0
    for omega in (1.0, 2.0):
        X = magnetic_generator(1.0, omega, B)
        for t in np.linspace(0, 4 * math.pi / omega, 100):
            S = magnetic_flow(t, 1.0, omega, B)
            err_m = max(err_m, float(np.abs(S - exp_flow(X, t)).max()))
            A, Bb, C, D = blocks(S)
            d = len(A)
            ident = max(ident, float(np.abs(A.T @ C - C.T @ A).max()),
                        float(np.abs(Bb.T @ D - D.T @ Bb).max()),
                        float(np.abs(A.T @ D - C.T @ Bb - np.eye(d)).max()))
    for t in ts:
        A, Bb, C, D = blocks(harmonic_flow(t))
        ident = max(ident, float(np.abs(A.T @ C - C.T @ A).max()),
                    float(np.abs(A.T @ D - C.T @ Bb - 1).max()))
    return [Check("harmonic_entry_err", err_h, 1e-12 * scale),
            Check("magnetic_vs_expm_err", err_m, 1e-8 * scale),
            Check("block_identity_err", ident, 1e-10 * scale)]


def suite_moyal(rng, scale) -> list[Check]:
    grid = GridSpec(1, 256, 1 / 16)
    worst = 0.0
    for _ in range(20):
        f, g, phi, gamma = (random_band_state(grid, rng) for _ in range(4))
        worst = max(worst, moyal_check(f, g, phi, gamma))
    return [Check("moyal_residual", worst, 1e-8 * scale)]


def suite_kernel_shadow(rng, scale) -> list[Check]:
    grid = square_grid(32)
    S = harmonic_flow(math.pi / 3)
    T = TypeIFIO(phase_from_symplectic(S))
    ref = kernel_from_operator(materialize(lambda f: apply_type1(T, band_project(f)), grid), S)
    direct = type1_kernel_direct(T, grid, band=True)
    mask = np.abs(ref.values) >= 1e-6 * np.abs(ref.values).max()
    rel = np.linalg.norm((direct.values - ref.values)[mask]) / np.linalg.norm(ref.values[mask])
    return [Check("relative_diff_significant", float(rel), 1e-2 * scale)]


def suite_sesquilinear(rng, scale) -> list[Check]:
    grid = square_grid(16)
    P = band_projector(grid).entries
    worst = 0.0
    for _ in range(10):
        T = random_band_operator(grid, rng, P)
        k = kernel_from_operator(T)
        f, g, u, v = (random_band_state(grid, rng) for _ in range(4))
        Wuv = cross_wigner(u, v)
        lhs = cross_wigner(T(f), T(g)).inner(Wuv)
        rhs = pairing(k, Wuv, PhaseSpaceFunction(grid, np.conj(cross_wigner(f, g).values)))
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return [Check("sesquilinear_rel_err", float(worst), 1e-8 * scale)]


def suite_graph(rng, scale) -> list[Check]:
    grid = square_grid(32)
    own, wrong = 1.0, 0.0
    cases = [(harmonic_flow(math.pi / 3), free_particle_flow(1.0)),
             (harmonic_flow(math.pi / 2), free_particle_flow(1.0)),
             (free_particle_flow(1.0), harmonic_flow(math.pi / 3))]
    for S, S_wrong in cases:
        k = metaplectic_kernel(S, grid)
        own = min(own, graph_concentration(k, S)["argmax_hit_rate"])
        wrong = max(wrong, graph_concentration(k, S_wrong)["argmax_hit_rate"])
    return [Check("own_graph_hit_rate", own, 0.95, "min"),
            Check("wrong_graph_hit_rate", wrong, 0.20)]


def suite_algebra(rng, scale) -> list[Check]:
    grid = square_grid(32)
    S1, S2 = harmonic_flow(math.pi / 6), harmonic_flow(math.pi / 4)
    kc = compose_kernels(metaplectic_kernel(S1, grid), metaplectic_kernel(S2, grid))
    hit = graph_concentration(kc, S1 @ S2)["argmax_hit_rate"]
    g16 = square_grid(16)
    P = band_projector(g16).entries
    A, B = random_band_operator(g16, rng, P), random_band_operator(g16, rng, P)
    ref = kernel_from_operator(A @ B).values
    got = compose_kernels(kernel_from_operator(A), kernel_from_operator(B)).values
    rel = np.linalg.norm(got - ref) / np.linalg.norm(ref)
    return [Check("composed_hit_rate", hit, 0.90, "min"),
            Check("composition_rel_err", float(rel), 1e-6 * scale)]


def suite_positivity(rng, scale) -> list[Check]:
    grid = square_grid(16)
    P = band_projector(grid).entries
    worst = math.inf
    for _ in range(5):
        k = kernel_from_operator(random_band_operator(grid, rng, P))
        for _ in range(20):
            Wf = wigner(random_band_state(grid, rng))
            Wg = wigner(random_band_state(grid, rng))
            worst = min(worst, pairing(k, Wf, Wg).real / (k.norm() * Wf.norm() * Wg.norm()))
    return [Check("min_normalized_pairing", worst, -1e-8 * scale, "min")]


def _caustic_pattern(flow: Flow, times, d: int) -> float:
    """1 if type-I construction fails exactly at ``t = pi/2`` in the sweep, else 0."""
    ok = True
    for t in times:
        try:
            phase_from_symplectic(flow.matrix(t, d))
            failed = False
        except CausticError:
            failed = True
        ok &= failed == math.isclose(t, math.pi / 2)
    return float(ok)


def suite_caustic(rng, scale) -> list[Check]:
    times = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi]
    grid = GridSpec(1, 256, 1 / 16)
    u0 = make_gaussian(grid, center=(1.0, 1.0))
    harmonic = Flow("harmonic")
    rep = compare(propagate(CauchyProblem(harmonic, u0, times)))
    checks = [
        Check("harmonic_caustic_pattern", _caustic_pattern(harmonic, times, 1), 1.0, "min"),
        Check("harmonic_max_gap", rep["max_gap"], 5e-3 * scale),
        Check("harmonic_spike_ratio", rep["spike_ratio"], 3.0 * scale),
    ]
    # d = 2 on a non-square lattice so no sweep time maps lattice points onto lattice points
    n, delta = 96, 0.07
    line = GridSpec(1, n, delta)
    a = make_gaussian(line, center=(0.5, 0.0))
    b = make_gaussian(line, center=(0.0, 0.5))
    u2 = SampledState(GridSpec(2, n, delta), np.outer(a.values, b.values))
    magnetic = Flow("magnetic", {"m": 1.0, "omega": 1.0})
    rep2 = compare(propagate(CauchyProblem(magnetic, u2, times)))
    checks += [
        Check("magnetic_caustic_pattern", _caustic_pattern(magnetic, times, 2), 1.0, "min"),
        Check("magnetic_max_partial_gap", rep2["max_gap"], 1e-2 * scale),
        Check("magnetic_spike_ratio", rep2["spike_ratio"], 3.0 * scale),
    ]
    return checks


def suite_perturbed(rng, scale) -> list[Check]:
    grid = square_grid(32)
    t = 0.1
    V = make_symbol("potential:cos")
    op = materialize(perturbed_propagator(Flow("harmonic"), V, t, t / 64), grid, pad=2, band=True)
    S = harmonic_flow(t)
    diag = graph_concentration(kernel_from_operator(op, S), S)
    prof = [diag["mass_profile"][r] for r in sorted(diag["mass_profile"])]
    monotone = all(b <= a for a, b in zip(prof, prof[1:])) and prof[-1] < prof[0]
    return [Check("hit_rate", diag["argmax_hit_rate"], 0.8, "min"),
            Check("monotone_offgraph_decay", float(monotone), 1.0, "min")]


def _zero_blocks(U, k):
    B = U[:2 * k, 2 * k:]
    C = U[2 * k:, :2 * k]
    return bool(np.all(B == 0)), bool(np.all(C == 0))


def suite_appendix(rng, scale) -> list[Check]:
    k = 2
    agree = 0
    total = 0
    for cls in ("upper", "lower", "diagonal"):
        for _ in range(100):
            M = np.eye(2 * k) + 0.3 * rng.normal(size=(2 * k, 2 * k))
            if cls in ("upper", "diagonal"):
                M[k:, :k] = 0
            if cls in ("lower", "diagonal"):
                M[:k, k:] = 0
            b0, c0 = _zero_blocks(ft2_conjugation(M), k)
            want = {"upper": c0, "lower": b0, "diagonal": b0 and c0}[cls]
            # converse: a generic M is in no class, so U has no zero block
            G = np.eye(2 * k) + 0.3 * rng.normal(size=(2 * k, 2 * k))
            gb, gc = _zero_blocks(ft2_conjugation(G), k)
            agree += int(want and not gb and not gc)
            total += 1
    worst = 0.0
    for _ in range(100):
        M1 = np.eye(2 * k) + 0.3 * rng.normal(size=(2 * k, 2 * k))
        M2 = np.eye(2 * k) + 0.3 * rng.normal(size=(2 * k, 2 * k))
        lhs = ft2_conjugation(M1 @ M2)
        worst = max(worst, float(np.abs(lhs - ft2_conjugation(M2) @ ft2_conjugation(M1)).max()))
    return [Check("block_equivalence_fraction", agree / total, 1.0, "min"),
            Check("functoriality_err", worst, 1e-10 * scale)]


# number, suite name, title, budget in seconds, function
CRITERIA: list[tuple[int, str, str, float, Callable]] = [
    (1, "symplectic", "symplectic flows", 1.0, suite_symplectic),
    (2, "moyal", "Moyal identity", 10.0, suite_moyal),
    (3, "kernel-shadow", "Wigner-kernel uniqueness shadow", 60.0, suite_kernel_shadow),
    (4, "sesquilinear", "sesquilinear kernel identity", 30.0, suite_sesquilinear),
    (5, "graph", "graph concentration", 60.0, suite_graph),
    (6, "algebra", "algebra property", 60.0, suite_algebra),
    (7, "positivity", "kernel positivity", 30.0, suite_positivity),
    (8, "caustic", "caustic experiment", 120.0, suite_caustic),
    (9, "perturbed", "perturbed propagator", 120.0, suite_perturbed),
    (10, "appendix", "block structure of U", 1.0, suite_appendix),
]
SUITES = [c[1] for c in CRITERIA]


def run_criterion(number: int, seed: int = 0, tolerance_scale: float = 1.0) -> CriterionResult:
    num, suite, title, budget, func = CRITERIA[number - 1]
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    checks = func(rng, tolerance_scale)
    runtime = time.perf_counter() - t0
    return CriterionResult(num, suite, title, checks, runtime, budget * tolerance_scale)


def run_suite(name: str, seed: int = 0, tolerance_scale: float = 1.0) -> list[CriterionResult]:
    """Run one named suite, or every criterion for ``name == "all"``."""
    if not tolerance_scale > 0:
        raise ValueError("tolerance_scale must be positive")
    if name == "all":
        numbers = [c[0] for c in CRITERIA]
    elif name in SUITES:
        numbers = [SUITES.index(name) + 1]
    else:
        raise KeyError(f"unknown suite {name!r}; known: all, {', '.join(SUITES)}")
    return [run_criterion(k, seed, tolerance_scale) for k in numbers]
