import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wigprop.symplectic import (NotSymplecticError, blocks, check_symplectic, exp_flow,
                                free_particle_flow, ft2_conjugation, harmonic_flow, in_algebra,
                                inverse, is_symplectic, magnetic_flow, magnetic_generator,
                                make_DE, make_VC, standard_J, symplectic_residual)

B2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def taylor_exp(X, t, terms=30):
    """Truncated exponential series, the independent oracle for exp_flow."""
    out = np.eye(len(X))
    term = np.eye(len(X))
    for k in range(1, terms):
        term = term @ (t * X) / k
        out = out + term
    return out


def random_symplectic(rng, d):
    """Product of random shears, dilations and J (the generators of Sp)."""
    S = np.eye(2 * d)
    for _ in range(4):
        C = rng.normal(size=(d, d))
        E = rng.normal(size=(d, d)) + 2 * np.eye(d)
        S = S @ make_VC(C + C.T) @ make_DE(E) @ standard_J(d)
    return S


def test_standard_J():
    assert np.array_equal(standard_J(1), [[0, 1], [-1, 0]])
    J = standard_J(2)
    assert np.array_equal(J @ J, -np.eye(4))
    assert is_symplectic(J)


def test_make_VC_DE():
    assert np.array_equal(make_VC([[0.0]]), np.eye(2))
    assert np.array_equal(make_VC([[2.0]]), [[1, 0], [2, 1]])
    assert np.allclose(make_DE([[3.0]]), np.diag([1 / 3, 3]))
    assert is_symplectic(make_VC([[2.0]])) and is_symplectic(make_DE([[3.0]]))
    with pytest.raises(ValueError):
        make_VC([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        make_DE([[0.0]])


def test_harmonic_flow_examples():
    assert np.allclose(harmonic_flow(0.0), np.eye(2))
    assert np.allclose(harmonic_flow(np.pi / 2), standard_J(1).T, atol=1e-15)
    assert np.allclose(harmonic_flow(0.3) @ harmonic_flow(0.9), harmonic_flow(1.2), atol=1e-12)


def test_free_flow_examples():
    assert np.array_equal(free_particle_flow(0.0), np.eye(2))
    assert np.array_equal(free_particle_flow(1.0), [[1, 1], [0, 1]])
    assert not blocks(free_particle_flow(2.5, 2)).C.any()


def test_magnetic_closed_form_examples():
    m, om = 1.5, 0.7
    for k in range(3):
        assert np.allclose(magnetic_flow(k * np.pi / om, m, om, B2), np.eye(4), atol=1e-12)
    A, B, C, D = blocks(magnetic_flow(np.pi / (2 * om), m, om, B2))
    assert np.allclose(A, 0, atol=1e-12) and np.allclose(D, 0, atol=1e-12)
    assert np.allclose(B, B2 / (m * om)) and np.allclose(C, -m * om * B2)
    for t in np.linspace(0, 3, 7):
        A, _, C, _ = blocks(magnetic_flow(t, m, om, B2))
        assert np.allclose(A.T @ C, -(m * om / 2) * np.sin(2 * om * t) * np.eye(2), atol=1e-12)
    with pytest.raises(ValueError):
        magnetic_flow(1.0, 1.0, 1.0, np.eye(2))


def test_exp_flow_matches_magnetic_closed_form():
    m, om = 1.0, 1.3
    X = magnetic_generator(m, om, B2)
    assert in_algebra(X)
    for t in np.linspace(0, 4 * np.pi / om, 100):
        assert np.max(np.abs(exp_flow(X, t) - magnetic_flow(t, m, om, B2))) < 1e-8


def test_exp_flow_rotation_against_taylor():
    X = np.array([[0.0, 1.0], [-1.0, 0.0]])
    for t in (0.3, 1.0, 2.0):
        S = exp_flow(X, t)
        assert np.max(np.abs(S - taylor_exp(X, t))) < 1e-10
        # frozen oracle: exp(tJ) is the rotation by -t
        assert np.max(np.abs(S - harmonic_flow(-t))) < 1e-10
    assert np.array_equal(exp_flow(np.zeros((2, 2)), 1.0), np.eye(2))
    with pytest.raises(ValueError):
        exp_flow(np.eye(2), 1.0)


def test_check_symplectic_raises():
    with pytest.raises(NotSymplecticError):
        check_symplectic(2 * np.eye(2))


def test_block_relations(rng):
    for _ in range(10):
        S = random_symplectic(rng, 2)
        A, B, C, D = blocks(S)
        if abs(np.linalg.det(A)) < 0.1:
            continue
        Ai = np.linalg.inv(A)
        assert np.allclose(C @ Ai, (C @ Ai).T, atol=1e-8)
        assert np.allclose(Ai @ B, (Ai @ B).T, atol=1e-8)
        assert np.allclose(D, C @ Ai @ B + Ai.T, atol=1e-8)


def test_inverse(rng):
    S = random_symplectic(rng, 2)
    assert np.allclose(inverse(S) @ S, np.eye(4), atol=1e-9)


def test_ft2_conjugation_diagonal_oracle():
    # T_M F(x, y) = F(a x, b y) conjugates to G -> |b|^{-1} G(a x, y / b),
    # a dilation whose projection is diag(1/a, b, a, 1/b) on (x, y, xi, eta).
    a, b = 2.0, -0.5
    U = ft2_conjugation(np.diag([a, b]))
    assert np.allclose(U, np.diag([1 / a, b, a, 1 / b]))
    assert np.array_equal(ft2_conjugation(np.eye(2)), np.eye(4))


def test_ft2_conjugation_functoriality(rng):
    M1, M2 = rng.normal(size=(2, 2, 2)) + 2 * np.eye(2)
    assert np.allclose(ft2_conjugation(M1 @ M2),
                       ft2_conjugation(M2) @ ft2_conjugation(M1), atol=1e-10)
    with pytest.raises(ValueError):
        ft2_conjugation(np.zeros((2, 2)))


def test_ft2_conjugation_upper_triangular_zero_blocks():
    M = np.array([[1.5, 0.7], [0.0, -2.0]])
    U = ft2_conjugation(M)
    assert is_symplectic(U)
    # upper triangular M yields an upper triangular U: exact zero C-block
    assert not blocks(U).C.any()
    assert blocks(U).B.any()


angles = st.floats(-10, 10, allow_nan=False)


@given(angles, angles)
def test_harmonic_group_property(s, t):
    assert np.allclose(harmonic_flow(s) @ harmonic_flow(t), harmonic_flow(s + t), atol=1e-12)


@given(angles, st.integers(1, 2))
def test_presets_symplectic_property(t, d):
    for S in (harmonic_flow(t, d), free_particle_flow(t, d)):
        assert symplectic_residual(S) <= 1e-10 * max(1.0, t * t)
        assert np.linalg.det(S) == pytest.approx(1.0, abs=1e-8 * max(1.0, t ** 4))


@given(st.floats(0, 20), st.floats(0.2, 3), st.floats(0.2, 3))
def test_magnetic_symplectic_property(t, m, om):
    S = magnetic_flow(t, m, om, B2)
    assert symplectic_residual(S) <= 1e-10 * max(1.0, m * om, 1 / (m * om)) ** 2


@given(st.integers(0, 2 ** 32 - 1))
def test_random_generator_products_symplectic(seed):
    S = random_symplectic(np.random.default_rng(seed), 1)
    assert symplectic_residual(S) <= 1e-10 * max(1.0, np.abs(S).max() ** 2)
    assert math.isclose(np.linalg.det(S), 1.0, rel_tol=1e-8)
