"""Symplectic matrices, generators and the linear flows of quadratic Hamiltonians.

Matrices are plain ``numpy`` arrays of shape ``(2d, 2d)`` acting on column
vectors ``(y, eta)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

SYMPLECTIC_TOL = 1e-10
EXP_FLOW_TOL = 1e-8


class NotSymplecticError(ValueError):
    """Matrix fails ``S^T J S = J`` beyond tolerance."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"symplectic residual {residual:.3e} exceeds {tol:.1e}")
        self.residual = residual
        self.tol = tol


class BlockDecomposition(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def assemble(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


def standard_J(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("d must be >= 1")
    eye, zero = np.eye(d), np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def dim(S: np.ndarray) -> int:
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise ValueError(f"expected a (2d, 2d) matrix, got shape {S.shape}")
    return S.shape[0] // 2


def symplectic_residual(S: np.ndarray) -> float:
    """``max |S^T J S - J|``."""
    J = standard_J(dim(S))
    return float(np.max(np.abs(S.T @ J @ S - J)))


def is_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    return symplectic_residual(S) <= tol


def check_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> np.ndarray:
    res = symplectic_residual(S)
    if res > tol:
        raise NotSymplecticError(res, tol)
    return np.asarray(S, dtype=float)


def blocks(S: np.ndarray) -> BlockDecomposition:
    d = dim(S)
    return BlockDecomposition(S[:d, :d], S[:d, d:], S[d:, :d], S[d:, d:])


def inverse(S: np.ndarray) -> np.ndarray:
    """Exact symplectic inverse ``J^{-1} S^T J``."""
    J = standard_J(dim(S))
    return -J @ S.T @ J


def make_VC(C) -> np.ndarray:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not np.allclose(C, C.T, atol=1e-12, rtol=0):
        raise ValueError("C must be symmetric")
    d = C.shape[0]
    return np.block([[np.eye(d), np.zeros((d, d))], [C, np.eye(d)]])


def make_DE(E) -> np.ndarray:
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if abs(np.linalg.det(E)) < 1e-14:
        raise ValueError("E must be invertible")
    d = E.shape[0]
    zero = np.zeros((d, d))
    return np.block([[np.linalg.inv(E), zero], [zero, E.T]])


def harmonic_flow(t: float, d: int = 1) -> np.ndarray:
    """Phase-space rotation by angle ``t`` on every coordinate plane."""
    c, s = np.cos(t), np.sin(t)
    eye = np.eye(d)
    return np.block([[c * eye, -s * eye], [s * eye, c * eye]])


def free_particle_flow(t: float, d: int = 1) -> np.ndarray:
    """Shear ``(y, eta) -> (y + t eta, eta)``."""
    eye = np.eye(d)
    return np.block([[eye, t * eye], [np.zeros((d, d)), eye]])


def _check_magnetic(m, omega, B) -> np.ndarray:
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if not (m > 0 and omega > 0):
        raise ValueError("mass and omega must be positive")
    if not (np.allclose(B.T, -B, atol=1e-12) and np.allclose(B.T @ B, np.eye(len(B)), atol=1e-12)):
        raise ValueError("B must satisfy B^T = -B and B^T B = I")
    return B


def magnetic_generator(m: float, omega: float, B) -> np.ndarray:
    """``X = J M`` for the uniform magnetic Hamiltonian ``z.Mz / 2``."""
    B = _check_magnetic(m, omega, B)
    eye = np.eye(len(B))
    return np.block([[omega * B, eye / m], [-m * omega ** 2 * eye, omega * B]])


def magnetic_flow(t: float, m: float, omega: float, B) -> np.ndarray:
    """Closed-form flow of the uniform magnetic Hamiltonian."""
    B = _check_magnetic(m, omega, B)
    eye = np.eye(len(B))
    c, s = np.cos(2 * omega * t), np.sin(2 * omega * t)
    diag = (1 + c) * eye + s * B
    off = (1 - c) * B + s * eye
    return 0.5 * np.block([[diag, off / (m * omega)], [-m * omega * off, diag]])


def in_algebra(X: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    """``X^T J + J X = 0``."""
    J = standard_J(dim(X))
    return float(np.max(np.abs(X.T @ J + J @ X))) <= tol * max(1.0, np.max(np.abs(X)))


def exp_flow(X: np.ndarray, t: float) -> np.ndarray:
    """``exp(t X)`` for ``X`` in the symplectic algebra.

    The result is not re-symplectified; inspect :func:`symplectic_residual`
    for drift.
    """
    X = np.asarray(X, dtype=float)
    if not in_algebra(X):
        raise ValueError("generator is not in the symplectic algebra")
    return scipy.linalg.expm(t * X)


def _block_inverse(M: np.ndarray, k: int) -> np.ndarray:
    """Inverse of ``M`` that keeps exactly zero off-diagonal ``k x k`` blocks zero."""
    A, B, C, D = M[:k, :k], M[:k, k:], M[k:, :k], M[k:, k:]
    upper, lower = not C.any(), not B.any()
    if not (upper or lower):
        return np.linalg.inv(M)
    Ai, Di = np.linalg.inv(A), np.linalg.inv(D)
    z = np.zeros((k, k))
    if upper and lower:
        return np.block([[Ai, z], [z, Di]])
    if upper:
        return np.block([[Ai, -Ai @ B @ Di], [z, Di]])
    return np.block([[Ai, z], [-Di @ C @ Ai, Di]])


def ft2_conjugation(M) -> np.ndarray:
    """Projection ``U`` of ``F_2^{-1} T_M F_2`` where ``T_M F = F o M``.

    ``M`` is an invertible ``2d x 2d`` matrix; ``U`` is ``4d x 4d`` and
    symplectic.  Note ``U(M1 M2) = U(M2) U(M1)`` since ``T_M`` composes in
    reverse order.
    """
    M = np.asarray(M, dtype=float)
    k = dim(M)
    if abs(np.linalg.det(M)) < 1e-14:
        raise ValueError("M must be invertible")
    Mi = _block_inverse(M, k)
    Mt = M.T
    m11, m12, m21, m22 = Mi[:k, :k], Mi[:k, k:], Mi[k:, :k], Mi[k:, k:]
    p11, p12, p21, p22 = Mt[:k, :k], Mt[:k, k:], Mt[k:, :k], Mt[k:, k:]
    z = np.zeros((k, k))
    return np.block([
        [m11, z, z, m12],
        [z, p22, -p21, z],
        [z, -p12, p11, z],
        [m21, z, z, m22],
    ])


def fourier2_matrix(d: int) -> np.ndarray:
    """Projection of the partial Fourier transform in the second variable on R^{2d}."""
    eye, z = np.eye(d), np.zeros((d, d))
    return np.block([
        [eye, z, z, z],
        [z, z, z, eye],
        [z, z, eye, z],
        [z, -eye, z, z],
    ])
