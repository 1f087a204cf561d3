"""Dense matrix primitives and unitary decompositions.

Matrices are plain numpy arrays. Phases are always reported on the
principal branch (-pi, pi].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    InvalidDimension,
    InvalidMatrix,
    NotSymmetric,
    NotUnitary,
    NumericalFailure,
)

UNITARY_TOL = 1e-10
SYMMETRY_TOL = 1e-10
CLUSTER_TOL = 1e-8


def principal_angle(phi):
    """Map angles onto (-pi, pi]; -pi itself goes to +pi."""
    return np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2 * np.pi)


def _as_square(M, dtype=None) -> np.ndarray:
    M = np.asarray(M, dtype=dtype)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidDimension(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix("matrix has non-finite entries")
    return M


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))))


def check_unitary(U, tol: float = UNITARY_TOL) -> np.ndarray:
    U = _as_square(U, dtype=complex)
    err = unitarity_defect(U)
    if err > tol:
        raise NotUnitary(f"||UU^dag - I||_max = {err:.3e} exceeds {tol:.1e}")
    return U


def check_real_symmetric(M, tol: float = SYMMETRY_TOL) -> np.ndarray:
    M = _as_square(M)
    if np.iscomplexobj(M):
        if np.max(np.abs(M.imag)) > tol:
            raise InvalidMatrix("generator must be real")
        M = M.real
    M = M.astype(float)
    asym = np.max(np.abs(M - M.T))
    if asym > tol * max(1.0, np.max(np.abs(M))):
        raise NotSymmetric(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    return 0.5 * (M + M.T)


def eigh_sym(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthogonal eigenvectors of a real symmetric matrix."""
    M = check_real_symmetric(M)
    w, Q = np.linalg.eigh(M)
    return w, Q


def expi_sym(G, sign: float = -1.0) -> np.ndarray:
    """Return exp(sign * i * G) for real symmetric G."""
    w, Q = np.linalg.eigh(np.asarray(G, dtype=float))
    return (Q * np.exp(1j * sign * w)) @ Q.T


def spectral_unitary(U) -> tuple[np.ndarray, np.ndarray]:
    """Spectral form U = V exp(-i diag(D)) V^dag.

    Uses the complex Schur form, which for a normal matrix is diagonal and
    yields an orthonormal eigenbasis even for degenerate eigenvalues.
    Returns ``(V, D)`` with ``D`` a 1-D array of phases in (-pi, pi].
    """
    U = check_unitary(U)
    T, V = scipy.linalg.schur(U, output="complex")
    D = principal_angle(-np.angle(np.diag(T)))
    return V, D


@dataclass(frozen=True)
class TakagiFactorization:
    """M = Q exp(i diag(phi)) Q^T with Q real orthogonal."""

    Q: np.ndarray
    phi: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.Q * np.exp(1j * self.phi)) @ self.Q.T


def _clusters(w: np.ndarray, tol: float) -> list[np.ndarray]:
    groups, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > tol:
            groups.append(np.arange(start, k))
            start = k
    return groups


def takagi_symmetric_unitary(M) -> TakagiFactorization:
    """Takagi factorization of a complex-symmetric unitary.

    Splits M = X + iY; X and Y are real symmetric and commute. X is
    diagonalized first and Y is then diagonalized inside every degenerate
    eigenspace of X (conjugate phase pairs share an X eigenvalue).
    """
    M = check_unitary(M)
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL:
        raise NotSymmetric("Takagi factorization requires M == M^T")
    M = 0.5 * (M + M.T)
    X, Y = M.real, M.imag
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    w, Q = np.linalg.eigh(X)
    for idx in _clusters(w, CLUSTER_TOL * scale):
        if len(idx) < 2:
            continue
        Qc = Q[:, idx]
        Yc = Qc.T @ Y @ Qc
        _, R = np.linalg.eigh(0.5 * (Yc + Yc.T))
        Q[:, idx] = Qc @ R
    x = np.einsum("ik,ij,jk->k", Q, X, Q)
    y = np.einsum("ik,ij,jk->k", Q, Y, Q)
    phi = principal_angle(np.arctan2(y, x))
    fac = TakagiFactorization(Q=Q, phi=phi)
    resid = np.max(np.abs(fac.reconstruct() - M))
    if resid > 1e-8:
        raise NumericalFailure(f"joint diagonalization residual {resid:.3e}")
    return fac


def sym_unitary_log(S) -> np.ndarray:
    """Principal real symmetric generator A with exp(-iA) = S."""
    fac = takagi_symmetric_unitary(S)
    A = -(fac.Q * fac.phi) @ fac.Q.T
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class ABADecomposition:
    """V = exp(-iA) exp(-iB) exp(iA) with A, B real symmetric."""

    A: np.ndarray
    B: np.ndarray
    residual: float

    def reconstruct(self) -> np.ndarray:
        return expi_sym(self.A, -1) @ expi_sym(self.B, -1) @ expi_sym(self.A, +1)


def aba_decompose(V) -> ABADecomposition:
    """Factor a unitary into three symmetric-unitary steps.

    With V = P exp(-i Lambda) P^dag, the symmetric unitary M = P P^T has a
    Takagi factorization Q exp(i Phi) Q^T. Taking A = -Q (Phi/2) Q^T makes
    O = exp(iA) P real orthogonal, so B = O Lambda O^T.
    """
    V = check_unitary(V)
    P, lam = spectral_unitary(V)
    fac = takagi_symmetric_unitary(P @ P.T)
    A = -(fac.Q * (fac.phi / 2)) @ fac.Q.T
    A = 0.5 * (A + A.T)
    O = (fac.Q * np.exp(-0.5j * fac.phi)) @ fac.Q.T @ P
    imag = float(np.linalg.norm(O.imag))
    if imag > 1e-8:
        raise NumericalFailure(f"ABA frame is not real: ||Im O||_F = {imag:.3e}")
    O = O.real
    B = (O * lam) @ O.T
    B = 0.5 * (B + B.T)
    dec = ABADecomposition(A=A, B=B, residual=0.0)
    residual = float(np.linalg.norm(dec.reconstruct() - V))
    if residual > 1e-9:
        raise NumericalFailure(f"ABA reconstruction residual {residual:.3e}")
    return ABADecomposition(A=A, B=B, residual=residual)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(n: int, rng) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def haar_orthogonal(n: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_instances(kind: str, n: int, seed) -> np.ndarray:
    """Seeded random matrices.

    kind is one of ``haar_unitary``, ``sym_generator`` (real symmetric with
    Gaussian entries) or ``spd_spectrum`` (Haar-orthogonal eigenvectors,
    eigenvalues uniform on (0, 1)).
    """
    if n < 1:
        raise InvalidDimension(f"n must be >= 1, got {n}")
    rng = _rng(seed)
    if kind == "haar_unitary":
        return haar_unitary(n, rng)
    if kind == "sym_generator":
        G = rng.standard_normal((n, n))
        return (G + G.T) / 2
    if kind == "spd_spectrum":
        Q = haar_orthogonal(n, rng)
        lam = rng.uniform(0.0, 1.0, size=n)
        while np.any(lam == 0.0):
            lam = rng.uniform(0.0, 1.0, size=n)
        A = (Q * lam) @ Q.T
        return 0.5 * (A + A.T)
    raise ValueError(f"unknown instance kind {kind!r}")
