import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wigprop.grid import GridSpec, SampledState, inner, make_gaussian
from wigprop.verify import random_band_state
from wigprop.wigner import (BandLimitError, a_half_apply, a_half_inverse, cross_wigner,
                            moyal_check, partial_wigner, rihaczek, tau_wigner, wigner)

G = GridSpec(1, 256, 1 / 16)
C4 = 2 ** 0.25


def gauss(x, x0=0.0, xi0=0.0):
    return C4 * np.exp(-np.pi * (x - x0) ** 2) * np.exp(2j * np.pi * xi0 * x)


def gauss_hat(xi, x0=0.0, xi0=0.0):
    return C4 * np.exp(-np.pi * (xi - xi0) ** 2) * np.exp(-2j * np.pi * x0 * (xi - xi0))


def quadrature_wigner(x, xi, f, g):
    """Dense-t Riemann sum of int f(x + t/2) conj g(x - t/2) exp(-2 pi i t xi) dt."""
    t = np.linspace(-12, 12, 6001)
    dt = t[1] - t[0]
    integrand = f(x[:, None] + t / 2) * np.conj(g(x[:, None] - t / 2))
    return dt * integrand @ np.exp(-2j * np.pi * np.outer(t, xi))


def test_gaussian_wigner_closed_form_and_quadrature():
    W = wigner(make_gaussian(G))
    X, XI = np.meshgrid(G.axis, G.wigner_axis, indexing="ij")
    closed = 2 * np.exp(-2 * np.pi * (X ** 2 + XI ** 2))
    assert np.max(np.abs(W.values - closed)) < 1e-6
    rows = slice(96, 160, 8)
    quad = quadrature_wigner(G.axis[rows], G.wigner_axis, gauss, gauss)
    assert np.max(np.abs(W.values[rows] - quad)) < 1e-6
    assert W.values.real.max() == pytest.approx(2.0, abs=1e-6)


def test_cross_wigner_conjugate_symmetry():
    f = make_gaussian(G, (0.5, 0.5))
    g = make_gaussian(G, (-0.3, 0.15))
    assert np.allclose(cross_wigner(f, g).values, np.conj(cross_wigner(g, f).values), atol=1e-14)


def test_total_integral_is_norm_squared():
    f = make_gaussian(G, (0.4, -0.6))
    assert wigner(f).total() == pytest.approx(inner(f, f), abs=1e-8)


def test_realness(rng):
    for _ in range(5):
        W = wigner(random_band_state(G, rng))
        assert np.abs(W.values.imag).max() <= 1e-10 * np.abs(W.values).max()


def test_band_limit_violation():
    g = GridSpec(1, 128, 1 / 8)
    with pytest.raises(BandLimitError):
        wigner(make_gaussian(g, (0.0, 2.5), width=2.0))


def test_tau_half_is_cross_wigner():
    f = make_gaussian(G, (0.3, 0.4))
    g = make_gaussian(G, (-0.2, 0.1))
    assert np.max(np.abs(tau_wigner(f, g, 0.5).values - cross_wigner(f, g).values)) < 1e-10


def test_rihaczek_against_closed_form():
    f = make_gaussian(G, (0.3, 0.4))
    g = make_gaussian(G, (-0.2, 0.1))
    X, XI = np.meshgrid(G.axis, G.wigner_axis, indexing="ij")
    oracle = gauss(X, 0.3, 0.4) * np.conj(gauss_hat(XI, -0.2, 0.1)) * np.exp(-2j * np.pi * XI * X)
    assert np.max(np.abs(rihaczek(f, g).values - oracle)) < 1e-8
    oracle1 = gauss_hat(XI, 0.3, 0.4) * np.conj(gauss(X, -0.2, 0.1)) * np.exp(2j * np.pi * XI * X)
    assert np.max(np.abs(tau_wigner(f, g, 1.0).values - oracle1)) < 1e-8
    with pytest.raises(ValueError):
        tau_wigner(f, g, 1.5)


def test_tau_interior_against_quadrature():
    tau = 0.3
    f = make_gaussian(G, (0.3, 0.4))
    W = tau_wigner(f, f, tau)
    x = G.axis[112:144:4]
    t = np.linspace(-12, 12, 6001)
    dt = t[1] - t[0]
    integrand = gauss(x[:, None] + tau * t, 0.3, 0.4) * np.conj(gauss(x[:, None] - (1 - tau) * t, 0.3, 0.4))
    quad = dt * integrand @ np.exp(-2j * np.pi * np.outer(t, G.wigner_axis))
    assert np.max(np.abs(W.values[112:144:4] - quad)) <= 1e-4 * np.abs(quad).max()


def test_a_half_matches_cross_wigner_and_inverts():
    f = make_gaussian(G, (0.3, 0.4))
    g = make_gaussian(G, (-0.2, 0.1))
    F = np.outer(f.values, np.conj(g.values))
    W = a_half_apply(F, G)
    assert np.max(np.abs(W.values - cross_wigner(f, g).values)) < 1e-8
    assert np.max(np.abs(a_half_inverse(W) - F)) < 1e-8


def random_packet(g, rng):
    """Random superposition of Gaussians well inside both windows."""
    parts = [(rng.normal() + 1j * rng.normal())
             * make_gaussian(g, (rng.uniform(-2, 2), rng.uniform(-0.5, 0.5))) for _ in range(3)]
    return parts[0] + parts[1] + parts[2]


def test_a_half_unitary_and_roundtrip(rng):
    g = GridSpec(1, 128, 1 / 8)
    a, b, c = (random_packet(g, rng) for _ in range(3))
    F = np.outer(a.values, np.conj(b.values)) + 0.5 * np.outer(c.values, np.conj(a.values))
    F /= np.sqrt(g.delta ** 2 * np.sum(np.abs(F) ** 2))
    W = a_half_apply(F, g)
    normF = np.sqrt(g.delta ** 2 * np.sum(np.abs(F) ** 2))
    assert W.norm() == pytest.approx(normF, rel=1e-10)
    assert np.max(np.abs(a_half_inverse(W) - F)) < 1e-8


def test_moyal_examples():
    fs = [make_gaussian(G, c) for c in [(0.2, 0.1), (-0.4, 0.3), (0.5, -0.5), (0.0, 0.7)]]
    assert moyal_check(*fs) < 1e-8
    f, g = fs[0], fs[1]
    lhs = wigner(f).inner(wigner(g))
    assert lhs == pytest.approx(abs(inner(f, g)) ** 2, abs=1e-8)
    # odd and even Hermite functions are orthogonal
    h0 = make_gaussian(G)
    h1 = SampledState(G, G.axis * h0.values)
    h1 = h1 * (1 / h1.norm())
    assert abs(cross_wigner(h0, fs[2]).inner(cross_wigner(h1, fs[2]))) < 1e-10


def test_moyal_twenty_random_quadruples(rng):
    worst = max(moyal_check(*(random_band_state(G, rng) for _ in range(4))) for _ in range(20))
    assert worst <= 1e-8


def test_partial_wigner_of_product_state():
    g2 = GridSpec(2, 64, 0.15)
    a = make_gaussian(GridSpec(1, 64, 0.15), (0.5, 0.25))
    b = make_gaussian(GridSpec(1, 64, 0.15), (-0.5, 0.0))
    u = SampledState(g2, np.outer(a.values, b.values))
    assert np.allclose(partial_wigner(u, 0).values, wigner(a).values, atol=1e-12)
    assert np.allclose(partial_wigner(u, 1).values, wigner(b).values, atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10)
def test_moyal_property(seed):
    rng = np.random.default_rng(seed)
    g = GridSpec(1, 64, 0.25)
    assert moyal_check(*(random_band_state(g, rng) for _ in range(4))) <= 1e-8


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_realness_property(x0, xi0):
    W = wigner(make_gaussian(G, (x0, xi0)))
    assert np.abs(W.values.imag).max() <= 1e-10 * np.abs(W.values).max()
