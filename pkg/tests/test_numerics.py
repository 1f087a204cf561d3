import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ses_forge import numerics
from ses_forge.errors import ContractViolation, InvalidDimension, NotSymmetric, NotUnitary


def test_principal_angle_branch():
    phi = numerics.principal_angle([0.0, np.pi, -np.pi, 3 * np.pi, 2 * np.pi + 0.5, -0.5])
    np.testing.assert_allclose(phi, [0.0, np.pi, np.pi, np.pi, 0.5, -0.5], atol=1e-12)


def test_check_unitary_rejects():
    with pytest.raises(NotUnitary):
        numerics.check_unitary(np.array([[1.0, 0.0], [0.0, 2.0]]))
    with pytest.raises(InvalidDimension):
        numerics.check_unitary(np.ones((2, 3)))
    with pytest.raises(ContractViolation):
        numerics.check_unitary(np.array([[np.nan]]))


def test_check_real_symmetric():
    with pytest.raises(NotSymmetric):
        numerics.check_real_symmetric([[0.0, 1.0], [0.0, 0.0]])
    out = numerics.check_real_symmetric([[1.0, 2.0], [2.0, 3.0]])
    assert out.dtype == float


def test_expi_sym_matches_expm():
    from scipy.linalg import expm

    G = numerics.random_instances("sym_generator", 5, 3)
    np.testing.assert_allclose(numerics.expi_sym(G, -1), expm(-1j * G), atol=1e-12)
    np.testing.assert_allclose(numerics.expi_sym(G, +1), expm(1j * G), atol=1e-12)


def test_spectral_unitary_degenerate():
    rng = np.random.default_rng(0)
    W = numerics.haar_unitary(4, rng)
    U = W @ np.diag(np.exp(1j * np.array([0.3, 0.3, -1.0, 0.3]))) @ W.conj().T
    V, D = numerics.spectral_unitary(U)
    assert numerics.unitarity_defect(V) < 1e-12
    np.testing.assert_allclose((V * np.exp(-1j * D)) @ V.conj().T, U, atol=1e-12)
    assert np.all(D <= np.pi) and np.all(D > -np.pi)


def test_spectral_identity_and_scalar():
    V, D = numerics.spectral_unitary(np.eye(3))
    np.testing.assert_allclose(D, 0, atol=1e-15)
    V, D = numerics.spectral_unitary([[-1.0]])
    assert D[0] == pytest.approx(np.pi)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_takagi_random(n):
    rng = np.random.default_rng(n)
    P = numerics.haar_unitary(n, rng)
    M = P @ P.T
    fac = numerics.takagi_symmetric_unitary(M)
    np.testing.assert_allclose(fac.Q @ fac.Q.T, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(fac.reconstruct(), M, atol=1e-10)


def test_takagi_degenerate_pairs():
    # conjugate phase pairs share a real part, so X alone cannot separate them
    rng = np.random.default_rng(5)
    Q = numerics.haar_orthogonal(4, rng)
    phi = np.array([0.7, -0.7, 0.7, 2.0])
    M = (Q * np.exp(1j * phi)) @ Q.T
    fac = numerics.takagi_symmetric_unitary(M)
    np.testing.assert_allclose(fac.reconstruct(), M, atol=1e-10)
    np.testing.assert_allclose(np.sort(fac.phi), np.sort(phi), atol=1e-10)


def test_takagi_requires_symmetry():
    rng = np.random.default_rng(1)
    with pytest.raises(NotSymmetric):
        numerics.takagi_symmetric_unitary(numerics.haar_unitary(3, rng))


def test_sym_unitary_log():
    rng = np.random.default_rng(2)
    P = numerics.haar_unitary(4, rng)
    S = P @ P.T
    A = numerics.sym_unitary_log(S)
    assert np.allclose(A, A.T) and np.isrealobj(A)
    np.testing.assert_allclose(numerics.expi_sym(A, -1), S, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 9), seed=st.integers(0, 2**32 - 1))
def test_aba_property(n, seed):
    V = numerics.haar_unitary(n, np.random.default_rng(seed))
    dec = numerics.aba_decompose(V)
    assert np.isrealobj(dec.A) and np.isrealobj(dec.B)
    np.testing.assert_allclose(dec.A, dec.A.T, atol=1e-12)
    np.testing.assert_allclose(dec.B, dec.B.T, atol=1e-12)
    assert dec.residual <= 1e-9
    np.testing.assert_allclose(dec.reconstruct(), V, atol=1e-9)


def test_aba_special_cases():
    dec = numerics.aba_decompose(np.eye(3))
    assert dec.residual < 1e-12
    dec = numerics.aba_decompose([[np.exp(0.4j)]])
    assert dec.residual < 1e-12
    # real orthogonal input: the rotation A may be chosen trivially
    Q = numerics.haar_orthogonal(5, np.random.default_rng(9))
    assert numerics.aba_decompose(Q).residual < 1e-9
    with pytest.raises(NotUnitary):
        numerics.aba_decompose(np.ones((2, 2)))


def test_random_instances():
    A = numerics.random_instances("spd_spectrum", 6, 11)
    w = np.linalg.eigvalsh(A)
    assert np.all(w > 0) and np.all(w < 1)
    np.testing.assert_array_equal(A, numerics.random_instances("spd_spectrum", 6, 11))
    U = numerics.random_instances("haar_unitary", 4, 1)
    assert numerics.unitarity_defect(U) < 1e-12
    with pytest.raises(InvalidDimension):
        numerics.random_instances("haar_unitary", 0, 1)
