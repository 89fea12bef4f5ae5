import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wigprop.grid import GridSpec, SampledState, fourier, inner, inverse_fourier, make_gaussian
from wigprop.quantize import (OperatorMatrix, Symbol, SymbolError, kn_apply, kn_kernel,
                              make_symbol, materialize, weyl_apply, weyl_kernel)
from wigprop.verify import random_band_state
from wigprop.wigner import cross_wigner

G = GridSpec(1, 64, 0.25)
GW = GridSpec(1, 128, 1 / 8)


def V(x):
    return np.cos(x) + 0.3 * x


def random_state(rng, grid=G):
    return SampledState(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))


def test_symbol_one_is_identity(rng):
    f = random_state(rng)
    one = make_symbol("one")
    assert np.max(np.abs(kn_apply(one, f).values - f.values)) < 1e-10
    assert np.max(np.abs(weyl_apply(one, f).values - f.values)) < 1e-10
    assert np.allclose(kn_kernel(one, G).entries, np.eye(G.n), atol=1e-12)


def test_potential_symbol_is_multiplication(rng):
    f = random_state(rng)
    sig = Symbol(lambda x, xi: V(x) + 0 * xi, kind="potential")
    assert np.max(np.abs(kn_apply(sig, f).values - V(G.axis) * f.values)) < 1e-10
    assert np.max(np.abs(weyl_apply(sig, f).values - V(G.axis) * f.values)) < 1e-10
    assert np.allclose(kn_kernel(sig, G).entries, np.diag(V(G.axis)), atol=1e-12)
    assert np.allclose(sig.potential(G), V(G.axis))


def test_gauss_multiplier_against_fourier_path(rng):
    f = random_state(rng)
    sig = make_symbol("multiplier:gauss")
    fh = fourier(f)
    oracle = inverse_fourier(SampledState(fh.grid, np.exp(-np.pi * fh.grid.axis ** 2) * fh.values))
    assert np.max(np.abs(kn_apply(sig, f).values - oracle.values)) < 1e-10


def test_registry():
    assert make_symbol("potential:cos", amplitude=2.0).kind == "potential"
    assert make_symbol("potential:lorentzian").kind == "potential"
    with pytest.raises(SymbolError):
        make_symbol("nope")


def test_weyl_duality_with_wigner(rng):
    f = make_gaussian(GW, (0.3, 0.2))
    g = make_gaussian(GW, (-0.4, -0.1))
    sig = Symbol(lambda x, xi: np.exp(-0.2 * (x - 0.2) ** 2 - 0.5 * xi ** 2) * (1 + 0.5j * xi))
    lhs = inner(weyl_apply(sig, f), g)
    X, XI = np.meshgrid(GW.axis, GW.wigner_axis, indexing="ij")
    W = cross_wigner(g, f)
    rhs = np.sum(sig(X, XI) * np.conj(W.values)) * W.cell
    assert abs(lhs - rhs) < 1e-8


def test_weyl_self_adjoint_for_real_symbol():
    sig = Symbol(lambda x, xi: np.exp(-0.1 * x ** 2) * np.cos(xi) + x * xi)
    M = weyl_kernel(sig, G).entries
    assert np.max(np.abs(M - M.conj().T)) <= 1e-8


def test_kn_kernel_matches_apply(rng):
    sig = Symbol(lambda x, xi: np.exp(-0.1 * (x - xi) ** 2) + 1j * np.sin(x) * xi)
    K = kn_kernel(sig, G)
    for _ in range(10):
        f = random_state(rng)
        assert np.max(np.abs(K.apply(f).values - kn_apply(sig, f).values)) < 1e-10
    assert np.max(np.abs(materialize(lambda u: kn_apply(sig, u), G).entries - K.entries)) < 1e-10


def test_materialize_identity_and_fourier():
    assert np.allclose(materialize(lambda u: u, G).entries, np.eye(G.n))
    F = materialize(lambda u: SampledState(G, fourier(u).values), G).entries
    # samples are weighted by delta on x and by 1/(n delta) on xi
    F = F * np.sqrt(1 / (G.n * G.delta) / G.delta)
    assert np.max(np.abs(F.conj().T @ F - np.eye(G.n))) <= 1e-10


def test_materialize_pad_band_shapes():
    assert materialize(lambda u: u, G, pad=2, band=True).entries.shape == (G.n, G.n)
    # projector onto the half band is idempotent
    M = materialize(lambda u: u, G, band=True)
    assert np.allclose(M.entries @ M.entries, M.entries, atol=1e-10)
    with pytest.raises(ValueError):
        materialize(lambda u: u, G, pad=0)


def test_operator_matrix_algebra(rng):
    A = OperatorMatrix(G, rng.normal(size=(G.n, G.n)))
    B = OperatorMatrix(G, rng.normal(size=(G.n, G.n)) * 1j)
    f = random_state(rng)
    assert np.allclose((A @ B).apply(f).values, A.apply(B.apply(f)).values)
    assert np.allclose(A.kernel() * G.cell, A.entries)
    assert inner(A.apply(f), f) == pytest.approx(inner(f, A.adjoint().apply(f)))


def test_sampled_symbol_interpolates_grid_values(rng):
    vals = rng.normal(size=(G.n, G.n))
    sig = Symbol.from_samples(G, vals)
    X, XI = np.meshgrid(G.axis, G.wigner_axis, indexing="ij")
    assert np.allclose(sig(X, XI), vals)


@given(st.integers(0, 2 ** 32 - 1), st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
@settings(max_examples=15)
def test_kn_apply_linear_property(seed, a, b):
    rng = np.random.default_rng(seed)
    sig = Symbol(lambda x, xi: np.exp(-0.1 * x ** 2) * (1 + xi ** 2) ** -1)
    f, g = random_state(rng), random_state(rng)
    lhs = kn_apply(sig, a * f + b * g)
    rhs = a * kn_apply(sig, f) + b * kn_apply(sig, g)
    scale = max(1.0, abs(a), abs(b)) * (f.norm() + g.norm())
    assert np.max(np.abs(lhs.values - rhs.values)) <= 1e-12 * scale * 10


@given(st.floats(-2, 2), st.floats(0.1, 1.0))
@settings(max_examples=15)
def test_weyl_self_adjoint_property(c, s):
    sig = Symbol(lambda x, xi: np.exp(-s * (x - c) ** 2) * np.cos(c * xi))
    M = weyl_kernel(sig, G).entries
    assert np.max(np.abs(M - M.conj().T)) <= 1e-8
