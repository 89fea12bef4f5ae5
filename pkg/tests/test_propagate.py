import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wigprop.fio import metaplectic_apply
from wigprop.grid import GridError, GridSpec, SampledState, fourier, make_gaussian
from wigprop.propagate import (MassLossWarning, NormDriftWarning, CauchyProblem, Flow,
                               caustic_times, compare, evolve_perturbed, evolve_quadratic,
                               mass_loss, overlap_phase, perturbed_propagator, propagate,
                               transport_marginals, transport_wigner)
from wigprop.quantize import Symbol, make_symbol
from wigprop.symplectic import free_particle_flow, harmonic_flow, magnetic_generator, standard_J
from wigprop.verify import square_grid
from wigprop.wigner import wigner

G = GridSpec(1, 256, 1 / 16)
B2 = [[0.0, 1.0], [-1.0, 0.0]]


def gauss_wigner(x, xi, x0, xi0):
    return 2 * np.exp(-2 * np.pi * ((x - x0) ** 2 + (xi - xi0) ** 2))


def product_state(n, delta, ca, cb):
    line = GridSpec(1, n, delta)
    a, b = make_gaussian(line, ca), make_gaussian(line, cb)
    return SampledState(GridSpec(2, n, delta), np.outer(a.values, b.values)), a, b


def test_flow_matrices():
    assert np.allclose(Flow("harmonic").matrix(0.4), harmonic_flow(0.4))
    assert np.allclose(Flow("free").matrix(0.4, 2), free_particle_flow(0.4, 2))
    X = magnetic_generator(1.0, 1.0, B2)
    mag = Flow("magnetic", {"m": 1.0, "omega": 1.0})
    assert np.allclose(Flow("generator", {"X": X}).matrix(0.7), mag.matrix(0.7, 2), atol=1e-10)
    assert Flow("harmonic").det_a(np.pi / 3) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Flow("nope")
    with pytest.raises(ValueError):
        Flow("generator")
    with pytest.raises(GridError):
        mag.matrix(0.1, 1)


def test_problem_validation():
    u0 = make_gaussian(G)
    with pytest.raises(GridError):
        CauchyProblem(Flow("magnetic"), u0, [1.0])
    with pytest.raises(ValueError):
        CauchyProblem(Flow("harmonic"), u0, [math.inf])
    p = CauchyProblem(Flow("harmonic"), u0, [0.5, 1.0])
    assert p.dt == pytest.approx(0.5 / 64)


def test_free_evolution_closed_form():
    p = CauchyProblem(Flow("free"), make_gaussian(G), [1.5])
    u = evolve_quadratic(p, 1.5)
    oracle = 2 ** 0.25 * (1 + 1.5j) ** -0.5 * np.exp(-np.pi * G.axis ** 2 / (1 + 1.5j))
    assert np.max(np.abs(u.values - oracle)) < 1e-8


def test_harmonic_period_and_quarter_turn():
    u0 = make_gaussian(G, (1.0, 0.5))
    p = CauchyProblem(Flow("harmonic"), u0, [2 * np.pi])
    assert np.max(np.abs(np.abs(evolve_quadratic(p, 2 * np.pi).values) - np.abs(u0.values))) < 1e-10
    v0 = make_gaussian(G, (1.0, 0.0))
    q = CauchyProblem(Flow("harmonic"), v0, [np.pi / 2])
    u = evolve_quadratic(q, np.pi / 2)
    assert np.max(np.abs(np.abs(u.values) - np.abs(fourier(v0).values))) < 1e-6


def test_semigroup_modulo_global_phase():
    u0 = make_gaussian(G, (1.0, 0.5))
    for t in (1.0, 2.5):
        a = evolve_quadratic(CauchyProblem(Flow("harmonic"), u0, [t]), t)
        h = CauchyProblem(Flow("harmonic"), u0, [t / 2])
        mid = evolve_quadratic(h, t / 2)
        b = evolve_quadratic(CauchyProblem(Flow("harmonic"), mid, [t / 2]), t / 2)
        assert overlap_phase(a, b) < 1e-10


def test_strang_second_order_and_consistency():
    g = GridSpec(1, 128, 1 / 16)
    u0 = make_gaussian(g, (0.5, 0.0))
    V = make_symbol("potential:cos")
    p = CauchyProblem(Flow("harmonic"), u0, [0.5], perturbation=V)
    ref = evolve_perturbed(p, 0.5, dt=0.5 / 512)
    errs = [(evolve_perturbed(p, 0.5, dt=0.5 / k) - ref).norm() for k in (8, 16, 32)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < o < 2.2 for o in orders)
    # a zero potential reproduces the quadratic evolution
    p0 = CauchyProblem(Flow("harmonic"), u0, [0.5], perturbation=make_symbol("potential:cos", amplitude=0.0))
    assert (evolve_perturbed(p0, 0.5) - evolve_quadratic(p0, 0.5)).norm() < 1e-10
    # each substep is unitary for a real potential
    assert abs(evolve_perturbed(p, 0.5).norm() - 1.0) < 1e-8
    pn = CauchyProblem(Flow("harmonic"), u0, [0.5])
    assert (evolve_perturbed(pn, 0.5) - evolve_quadratic(pn, 0.5)).norm() == 0.0


def test_perturbed_warnings_and_limits():
    g = GridSpec(1, 64, 1 / 8)
    u0 = make_gaussian(g)
    sig = Symbol(lambda x, xi: 0.5 * np.exp(-x ** 2) * (1 + xi ** 2) ** -1)
    p = CauchyProblem(Flow("harmonic"), u0, [0.5], perturbation=sig, dt=0.1)
    with pytest.warns(NormDriftWarning), pytest.warns(UserWarning, match="non-potential"):
        evolve_perturbed(p, 0.5)
    with pytest.raises(OverflowError):
        perturbed_propagator(Flow("harmonic"), make_symbol("one"), 1.0, 1e-7)


def test_quarter_turn_transport_on_square_grid():
    g = square_grid(256)
    u0 = make_gaussian(g, (1.0, 0.5))
    W0 = wigner(u0)
    Wt = transport_wigner(W0, harmonic_flow(np.pi / 2))
    X, XI = np.meshgrid(g.axis, g.wigner_axis, indexing="ij")
    ref = gauss_wigner(XI, -X, 1.0, 0.5)
    assert np.linalg.norm(Wt.values - ref) / np.linalg.norm(ref) <= 1e-3


def test_full_covariance_fine_square_grid():
    g = square_grid(1024)
    f = make_gaussian(g, (0.5, 0.3))
    W = wigner(f)
    for S in (harmonic_flow(np.pi / 3), free_particle_flow(1.0), standard_J(1)):
        Ws = wigner(metaplectic_apply(S, f), check_band=False)
        assert (Ws - transport_wigner(W, S)).norm() <= 1e-3 * W.norm()


def test_argmax_covariance():
    f = make_gaussian(G, (1.0, 0.5))
    z0 = wigner(f).argmax()
    for S in (harmonic_flow(0.8), free_particle_flow(1.2), standard_J(1)):
        u = metaplectic_apply(S, f)
        z1 = wigner(u, check_band=False).argmax()
        target = S @ z0
        assert abs(z1[0] - target[0]) <= G.delta + 1e-12
        assert abs(z1[1] - target[1]) <= G.wigner_dxi + 1e-12


def test_free_transport_and_argmax():
    g = square_grid(256)
    x0, xi0 = -1.0, 0.5
    u0 = make_gaussian(g, (x0, xi0))
    W0 = wigner(u0)
    X, XI = np.meshgrid(g.axis, g.wigner_axis, indexing="ij")
    for t in (0.0, 1.0, 2.0):
        Wt = transport_wigner(W0, free_particle_flow(t))
        ref = gauss_wigner(X - t * XI, XI, x0, xi0)
        assert np.linalg.norm(Wt.values - ref) <= 1e-6 * np.linalg.norm(ref)
        assert mass_loss(W0, Wt) <= 1e-3
        u = evolve_quadratic(CauchyProblem(Flow("free"), u0, [t]), t)
        z = wigner(u, check_band=False).argmax()
        assert abs(z[0] - (x0 + t * xi0)) <= g.delta + 1e-12
        assert abs(z[1] - xi0) <= g.wigner_dxi + 1e-12


def test_identity_transport():
    W0 = wigner(make_gaussian(G, (0.3, 0.3)))
    assert np.array_equal(transport_wigner(W0, np.eye(2)).values, W0.values)


def test_mass_loss_warning():
    g = GridSpec(1, 128, 1 / 8)
    W0 = wigner(make_gaussian(g, (5.0, 0.0)))
    with pytest.warns(MassLossWarning):
        Wt = transport_wigner(W0, free_particle_flow(5.0))
    assert mass_loss(W0, Wt) > 1e-3


def test_transport_marginals_product_rotation():
    n, delta = 64, 0.12
    u, a, b = product_state(n, delta, (0.5, 0.0), (0.0, 0.5))
    Wa, Wb = wigner(a), wigner(b)
    # identity: marginals are the factors times the other's total mass
    M1, M2 = transport_marginals(Wa, Wb, np.eye(4))
    assert np.allclose(M1.values, Wa.values * Wb.total().real, atol=1e-12)
    assert np.allclose(M2.values, Wb.values * Wa.total().real, atol=1e-12)
    # exchanging the two planes swaps the marginals
    swap = np.zeros((4, 4))
    swap[0, 1] = swap[1, 0] = swap[2, 3] = swap[3, 2] = 1.0
    N1, N2 = transport_marginals(Wa, Wb, swap)
    assert np.allclose(N1.values, M2.values, atol=1e-12)


def test_caustic_times_harmonic_and_magnetic():
    roots = caustic_times(Flow("harmonic"), (0.0, 5.0))
    assert len(roots) == 2
    assert abs(roots[0] - np.pi / 2) < 1e-10 and abs(roots[1] - 3 * np.pi / 2) < 1e-10
    mroots = caustic_times(Flow("magnetic", {"m": 1.0, "omega": 1.0}), (0.0, 2 * np.pi), d=2)
    assert np.allclose(mroots, [np.pi / 2, 3 * np.pi / 2], atol=1e-9, rtol=0)
    assert caustic_times(Flow("free"), (0.0, 10.0)) == []
    with pytest.raises(ValueError):
        caustic_times(Flow("harmonic"), (1.0, 0.0))


def test_propagate_and_compare_d1():
    u0 = make_gaussian(G, (1.0, 1.0))
    times = [0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi]
    run = propagate(CauchyProblem(Flow("harmonic"), u0, times))
    assert run.times == times
    rep = compare(run)
    failed = [r["type1_failed"] for r in rep["records"]]
    assert failed == [False, False, True, False, False]
    assert all(abs(r["norm"] - 1) < 1e-6 for r in rep["records"])
    assert rep["max_gap"] <= 5e-3
    assert rep["spike_ratio"] <= 3.0


def test_propagate_d2_partial_wigners():
    u, _, _ = product_state(64, 0.12, (0.5, 0.0), (0.0, 0.5))
    run = propagate(CauchyProblem(Flow("magnetic", {"m": 1.0, "omega": 1.0}), u, [0.0, 0.5]))
    sl = run.slices[1]
    assert len(sl.wigner) == 2 and len(sl.transported) == 2
    rep = compare(run)
    assert "partial_gaps" in rep["records"][1]
    assert rep["records"][0]["partial_gaps"] == pytest.approx([0.0, 0.0], abs=1e-10)


def test_d2_requires_product_state():
    rng = np.random.default_rng(0)
    g = GridSpec(2, 16, 0.5)
    u = SampledState(g, rng.normal(size=(16, 16)))
    with pytest.raises(GridError):
        propagate(CauchyProblem(Flow("free"), u, [0.5]))


@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
@settings(max_examples=10)
def test_semigroup_property(s, t):
    g = GridSpec(1, 128, 1 / 8)
    u0 = make_gaussian(g, (0.5, 0.2))
    a = evolve_quadratic(CauchyProblem(Flow("harmonic"), u0, [s + t]), s + t)
    mid = evolve_quadratic(CauchyProblem(Flow("harmonic"), u0, [t]), t)
    b = evolve_quadratic(CauchyProblem(Flow("harmonic"), mid, [s]), s)
    assert overlap_phase(a, b) < 1e-8


@given(st.floats(-3.0, 3.0))
@settings(max_examples=10)
def test_norm_conservation_property(t):
    u0 = make_gaussian(G, (0.5, -0.5))
    for kind in ("harmonic", "free"):
        u = evolve_quadratic(CauchyProblem(Flow(kind), u0, [t]), t)
        assert u.norm() == pytest.approx(1.0, abs=1e-6)
