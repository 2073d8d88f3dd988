import numpy as np
import pytest

from conelab import cones, jordan
from conelab import psdmaps as pm
from conelab.psdmaps import CanonicalFormError, FactorizationRefused, HermMap

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def random_hermitian(d, rng):
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return A + A.conj().T


def test_choi_examples():
    for d in (2, 3):
        assert np.array_equal(pm.choi(pm.identity_map(d)), np.eye(d * d))
    rng = np.random.default_rng(0)
    x, phi = rng.standard_normal(4), rng.standard_normal(4)
    P = HermMap(2, 2, np.outer(x, phi))
    assert np.allclose(pm.choi(P), np.outer(phi, x))
    assert np.array_equal(pm.map_from_choi(pm.choi(P), 2, 2).matrix, P.matrix)
    with pytest.raises(ValueError):
        pm.map_from_choi(np.zeros((3, 4)), 2, 2)


def test_choi_matrix_of_identity_is_unnormalized_bell_projector():
    C = pm.choi_matrix(np.eye(4), 2, 2)
    omega = np.array([1, 0, 0, 1])
    assert np.allclose(C, np.outer(omega, omega))


def test_transpose_and_adjoint():
    T = pm.transpose_map(2)
    assert np.allclose(T(SY), -SY)
    assert np.allclose(T(SX), SX)
    rng = np.random.default_rng(1)
    H = random_hermitian(3, rng)
    assert np.allclose(pm.transpose_map(3)(H), H.T)
    P = HermMap(2, 3, rng.standard_normal((9, 4)))
    assert np.array_equal(pm.adjoint(pm.adjoint(P)).matrix, P.matrix)


def test_adjoint_is_trace_dual():
    rng = np.random.default_rng(2)
    P = pm.random_positive_map(3, rng)
    X, Y = random_hermitian(3, rng), random_hermitian(3, rng)
    lhs = np.trace(Y.conj().T @ P(X)).real
    rhs = np.trace(pm.adjoint(P)(Y).conj().T @ X).real
    assert lhs == pytest.approx(rhs)


def test_map_arithmetic():
    P = pm.identity_map(2)
    Q = pm.transpose_map(2)
    assert np.array_equal((P @ Q).matrix, Q.matrix)
    assert np.array_equal((2 * P - P).matrix, P.matrix)
    assert np.array_equal(HermMap.from_json(Q.to_json()).matrix, Q.matrix)
    with pytest.raises(ValueError):
        HermMap(2, 2, np.eye(3))


def test_named_maps():
    B = pm.named_map("breuer_hall")
    assert np.allclose(B(np.eye(4)), 2 * np.eye(4))
    R = pm.named_map("reduction", 2)
    assert np.allclose(R(SX), -SX)
    PA = pm.named_map("spin_projection", [SX, SY, SZ])
    assert np.allclose(PA.matrix, np.eye(4))
    with pytest.raises(ValueError):
        pm.named_map("spin_projection", [SX, SX])
    with pytest.raises(ValueError):
        pm.named_map("spin_projection", [2 * SX])
    with pytest.raises(ValueError):
        pm.named_map("nonsense")


def test_spin_projection_properties():
    # three anticommuting spins in M_4
    spins = [np.kron(SX, np.eye(2)), np.kron(SY, np.eye(2)), np.kron(SZ, SX)]
    P = pm.named_map("spin_projection", spins)
    M = P.matrix
    assert np.allclose(M @ M, M, atol=1e-14)
    assert np.allclose(M, M.T, atol=1e-14)
    assert np.allclose(P(np.eye(4)), np.eye(4))
    assert np.linalg.matrix_rank(M) == len(spins) + 1
    for s in spins:
        assert np.allclose(P(s), s)


def test_reduction_spectra():
    R2 = pm.named_map("reduction", 2)
    T2 = pm.transpose_map(2)
    assert np.allclose(np.sort(np.linalg.eigvalsh((R2 @ T2).matrix)), [-1, -1, 1, 1])
    R3 = pm.named_map("reduction", 3)
    ev = np.sort(np.linalg.eigvalsh((R3 @ pm.transpose_map(3)).matrix))
    assert np.allclose(ev, [-1] * 5 + [1] * 3 + [2])


def test_canonical_form_examples():
    with pytest.raises(CanonicalFormError, match="degenerate"):
        pm.canonical_form(pm.named_map("reduction", 2))
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    y0 = jordan.coords_from_matrices(a @ a.conj().T)
    P = HermMap(2, 2, np.outer(y0, y0)) @ pm.transpose_map(2)
    cf = pm.canonical_form(P)
    assert cf.rank == 1 and len(cf.lambdas) == 0
    B = pm.named_map("breuer_hall")
    cf = pm.canonical_form(B @ pm.transpose_map(4))
    assert cf.rank == 6 and np.allclose(cf.lambdas, -1.0)


def test_canonical_form_rejects_asymmetric_map():
    rng = np.random.default_rng(4)
    P = HermMap(2, 2, rng.standard_normal((4, 4)))
    with pytest.raises(CanonicalFormError):
        pm.canonical_form(P)


def test_canonical_form_reconstruction_random():
    rng = np.random.default_rng(5)
    for d in (2, 3):
        T = pm.transpose_map(d)
        trace_id = pm.from_function(lambda X: np.trace(X) * np.eye(d), d, d)
        done = 0
        while done < 50:
            P = HermMap(d, d, rng.standard_normal((d * d, d * d)))
            P = 0.5 * (P + T @ pm.adjoint(P) @ T)
            P = P + 3.0 * trace_id
            cf = pm.canonical_form(P)
            S = (P @ T).matrix
            assert np.linalg.norm(cf.reconstruct() - S) <= 1e-10 * max(1.0, np.linalg.norm(S))
            done += 1


def test_breuer_hall_factorization():
    B = pm.named_map("breuer_hall")
    f = pm.lorentz_factorize(B)
    assert f.k == 5 and f.residual <= 1e-10
    E = pm.breuer_hall_embedding()
    A = np.diag([1.0, -1, -1, -1, -1, -1])
    assert np.allclose(f.map_matrix(), 0.5 * E @ A @ E.T, atol=1e-12)
    assert f.positivity_min_eig >= -1e-12
    again = pm.lorentz_factorize(f.as_map())
    assert again.k == f.k and again.residual <= 1e-10


def test_reduction_factorizations():
    f = pm.lorentz_factorize(pm.named_map("reduction", 2))
    assert f.k == 3 and f.residual <= 1e-10
    s = pm.reduction_spinor_factorization()
    assert s.k == 3 and s.residual <= 1e-14
    assert np.allclose(s.map_matrix(), pm.named_map("reduction", 2).matrix)
    u = np.array([1.0, 0.6, 0.0, 0.8])
    assert np.linalg.eigvalsh(s.alpha_of(u)).min() >= -1e-14


def test_rank_one_factorization():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    y0 = jordan.coords_from_matrices(a @ a.conj().T)
    f = pm.lorentz_factorize(HermMap(3, 3, np.outer(y0, y0)))
    assert f.k == 0 and f.residual <= 1e-10


def test_refusal_names_positive_eigenvalue():
    y0 = jordan.coords_from_matrices(np.eye(2, dtype=complex))
    y1 = jordan.coords_from_matrices(SZ)
    P = HermMap(2, 2, 2 * np.outer(y0, y0) + np.outer(y1, y1))
    with pytest.raises(FactorizationRefused) as err:
        pm.lorentz_factorize(P)
    assert err.value.offending == [pytest.approx(0.5)]


def test_psd_lorentz_max_membership_examples():
    r = pm.lorentz_psd_max_membership([np.eye(2)], starts=20)
    assert r["member"] and r["minimum"] == pytest.approx(1.0)
    r = pm.lorentz_psd_max_membership([np.eye(2), np.sqrt(2) * SZ], starts=50)
    assert not r["member"] and r["minimum"] == pytest.approx(-1.0)
    assert r["certificate"].verify()
    r = pm.lorentz_psd_max_membership([np.eye(2), SZ], starts=50)
    assert r["member"] and r["minimum"] == pytest.approx(0.0, abs=1e-9)
    assert not pm.lorentz_psd_max_membership([-np.eye(2)])["member"]
    with pytest.raises(ValueError):
        pm.lorentz_psd_max_membership([np.eye(5)])


def test_block_positivity_refutations_are_verifiable():
    rng = np.random.default_rng(7)
    for _ in range(10):
        Xs = [np.eye(2) * rng.uniform(0.5, 1.5)] + [random_hermitian(2, rng) * 0.5 for _ in range(2)]
        r = pm.lorentz_psd_max_membership(Xs, starts=30, rng=rng)
        if not r["member"] and r["certificate"] is not None:
            assert cones.verify_certificate(r["certificate"])


def test_generalized_reduction_examples():
    fact = pm.reduction_spinor_factorization()
    r = pm.generalized_reduction_check(pm.identity_map(2), fact)
    assert r["failed_test"] == "choi_psd"
    assert r["choi_min_eig"] == pytest.approx(-1.0)
    assert r["certificate"].verify()

    rng = np.random.default_rng(8)
    P = HermMap(2, 2, np.zeros((4, 4)))
    for _ in range(3):
        a, b = random_hermitian(2, rng), random_hermitian(2, rng)
        a = a @ a
        b = b @ b
        P = P + HermMap(2, 2, np.outer(jordan.coords_from_matrices(a), jordan.coords_from_matrices(b)))
    r = pm.generalized_reduction_check(P, fact)
    assert r["failed_test"] is None and r["certificate"] is None


def test_depolarizing_mixture_ppt_boundary():
    # X -> p X + (1 - p) Tr(X) I / 2 composed with the reduction map is PPT exactly up to p = 1/3
    fact = pm.reduction_spinor_factorization()
    values = {}
    for p in (0.2, 1 / 3, 0.5):
        D = pm.from_function(lambda X: p * X + (1 - p) * np.trace(X) * np.eye(2) / 2, 2, 2)
        values[p] = pm.generalized_reduction_check(D, fact)
    assert values[0.2]["failed_test"] is None
    assert values[1 / 3]["failed_test"] is None
    assert abs(min(values[1 / 3]["choi_min_eig"], values[1 / 3]["ppt_min_eig"])) <= 1e-12
    assert values[0.5]["failed_test"] is not None


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        pm.generalized_reduction_check(pm.identity_map(3), pm.reduction_spinor_factorization())
