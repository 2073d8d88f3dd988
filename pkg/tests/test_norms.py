import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from conelab import cones, norms
from conelab.norms import l1, l2, linf


def lp_projective_l1(z):
    """pi_2(l1) as an LP over decompositions into signed basis products."""
    n = z.shape[0]
    atoms = []
    for i, j in itertools.product(range(n), repeat=2):
        for s in (1.0, -1.0):
            a = np.zeros((n, n))
            a[i, j] = s
            atoms.append(a.reshape(-1))
    atoms = np.array(atoms)
    res = linprog(np.ones(len(atoms)), A_eq=atoms.T, b_eq=z.reshape(-1), bounds=(0, None))
    return res.fun


def lp_injective_linf_dual(z):
    """sup <w, z> over the unit ball of eps_2(linf), which is the entrywise box."""
    n = z.shape[0]
    res = linprog(-z.reshape(-1), bounds=[(-1, 1)] * (n * n))
    return -res.fun


def test_injective_examples():
    assert norms.injective_norm(np.eye(2), l2(2))["value"] == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    for X in (l1(3), l2(3), linf(3)):
        r = norms.injective_norm(np.outer(a, b), X)
        assert r["value"] == pytest.approx(norms.vnorm(a, X) * norms.vnorm(b, X), rel=1e-9)
    r = norms.injective_norm(np.diag([1.0, -1.0]), l1(2))
    assert r["exact"] and r["value"] == 2.0


def test_projective_examples():
    assert norms.projective_norm(np.eye(2), l2(2))["value"] == pytest.approx(2.0)
    z = np.array([[1.0, -1.0], [0.5, 0.0]])
    r = norms.projective_norm(z, l1(2))
    assert r["exact"] and r["value"] == 2.5 == pytest.approx(lp_projective_l1(z))
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    for X in (l1(3), l2(3)):
        r = norms.projective_norm(np.outer(a, b), X)
        assert r["value"] == pytest.approx(norms.vnorm(a, X) * norms.vnorm(b, X), rel=1e-9)


def test_projective_l1_matches_lp_on_integer_tensors():
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = rng.integers(-3, 4, size=(3, 3)).astype(float)
        val = norms.projective_norm(z, l1(3))["value"]
        assert val == lp_projective_l1(z)
        # pi_2(l1) is dual to eps_2(linf), whose unit ball is the entrywise box
        assert val == pytest.approx(lp_injective_linf_dual(z))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), kind=st.sampled_from(["l1", "l2", "linf"]),
       n=st.integers(2, 3))
def test_injective_at_most_projective(seed, kind, n):
    X = norms.SpaceDescriptor(kind, n)
    z = np.random.default_rng(seed).standard_normal((n, n))
    eps = norms.injective_norm(z, X)
    pi = norms.projective_norm(z, X)
    assert eps["lower"] <= pi["upper"] * (1 + 1e-9)
    assert eps["lower"] <= eps["upper"] * (1 + 1e-12)
    assert pi["lower"] <= pi["upper"] * (1 + 1e-12)


def test_operator_norms():
    rng = np.random.default_rng(3)
    P = rng.standard_normal((3, 3))
    assert norms.operator_norm(P, l2(3), l2(3)) == pytest.approx(np.linalg.norm(P, 2))
    assert norms.operator_norm(P, l1(3), l1(3)) == pytest.approx(np.abs(P).sum(axis=0).max())
    assert norms.operator_norm(P, linf(3), linf(3)) == pytest.approx(np.abs(P).sum(axis=1).max())
    signs = norms.sign_vectors(3)
    brute = max(np.abs(P @ s).sum() for s in signs)
    assert norms.operator_norm(P, linf(3), l1(3)) == pytest.approx(brute)


def test_nuclear_examples():
    for n in (1, 2, 3, 4):
        assert norms.nuclear_norm(np.eye(n), l2(n), l2(n))["value"] == pytest.approx(n)
        assert norms.nuclear_norm(np.eye(n), l1(n), l1(n))["value"] == pytest.approx(n)
    r = norms.nuclear_norm(np.zeros((3, 3)), l1(3), l2(3))
    assert r["value"] == 0.0 and r["exact"]
    r = norms.nuclear_norm(np.array([[1.0, 1.0], [0.0, 0.0]]), l1(2), l1(2))
    assert r["value"] == 1.0


def lp_nuclear_from_l1(P, Y):
    """Nuclear norm l1 -> Y for polyhedral Y, as an LP over y (x) s.

    y runs over the extreme points of the Y ball and s over sign vectors, the
    extreme points of the linf ball dual to l1.
    """
    m, n = P.shape
    if Y.kind == "l1":
        ys = np.vstack([np.eye(m), -np.eye(m)])
    else:
        ys = norms.sign_vectors(m)
    atoms = np.array([np.outer(y, s).reshape(-1) for y in ys for s in norms.sign_vectors(n)])
    res = linprog(np.ones(len(atoms)), A_eq=atoms.T, b_eq=P.reshape(-1), bounds=(0, None))
    return res.fun


def test_nuclear_from_l1_matches_lp_oracle():
    rng = np.random.default_rng(4)
    for _ in range(10):
        P = rng.standard_normal((3, 3))
        for Y in (l1(3), linf(3)):
            assert norms.nuclear_norm(P, l1(3), Y)["value"] == pytest.approx(lp_nuclear_from_l1(P, Y), rel=1e-7)


def test_nuclear_brackets_for_conic_pairs():
    rng = np.random.default_rng(5)
    P = rng.standard_normal((3, 3))
    for X, Y in ((l1(3), l2(3)), (l2(3), linf(3))):
        r = norms.nuclear_norm(P, X, Y)
        assert r["lower"] <= r["upper"]
        assert r["upper"] >= norms.operator_norm(P, X, Y) - 1e-9
    # the column expansion P = sum_j (P e_j) (x) e_j^* bounds the l1 -> l2 value from above
    r = norms.nuclear_norm(P, l1(3), l2(3))
    assert r["upper"] <= np.linalg.norm(P, axis=0).sum() + 1e-9


def test_tau_examples():
    b = norms.tau_bounds(np.eye(2), l2(2), l2(2), 8)
    assert b.lower >= 2 * 2 ** (-1 / 8) - 1e-12
    assert b.upper == pytest.approx(2.0)
    b1 = norms.tau_bounds(np.eye(3), l2(3), l2(3), 1)
    assert b1.lower == pytest.approx(1.0)
    b = norms.tau_bounds(np.eye(3), l1(3), l1(3), 2)
    assert b.upper == pytest.approx(3.0)
    assert b.reference == pytest.approx(np.sqrt(3))
    assert b.lower <= b.upper


def test_tau_lower_nondecreasing_for_l2_identity():
    lows = [norms.tau_bounds(np.eye(2), l2(2), l2(2), k).lower for k in range(1, 7)]
    assert all(b >= a - 1e-12 for a, b in zip(lows, lows[1:]))


def test_projection_examples_and_properties():
    e = np.zeros((3, 3, 3))
    e[0, 0, 0] = 1.0
    assert np.array_equal(norms.project_Xk(e), e)
    mixed = np.outer([1.0, 0, 0], [0, 0.3, -0.2])
    assert np.array_equal(norms.project_Xk(mixed), np.zeros((3, 3)))
    rng = np.random.default_rng(6)
    z = rng.standard_normal((3, 3, 3))
    assert np.abs(norms.project_Xk(z) - norms.project_Xk_product(z)).max() <= 1e-12
    P = norms.projection_matrix(3, 3)
    assert np.abs(P @ P - P).max() <= 1e-14
    assert np.abs(P - P.T).max() <= 1e-14


def test_projection_preserves_polyhedral_max_and_min():
    rng = np.random.default_rng(7)
    C = cones.ell1(2)
    for _ in range(20):
        t = cones.sample_max_tensor(C, 2, rng, boundary=False)
        assert cones.polyhedral_max_membership(norms.project_Xk(t), C, 2)["member"]
        s = cones.sample_min_tensor(C, 2, rng)
        assert cones.polyhedral_min_membership(norms.project_Xk(s), C, 2)["member"]


def _bell():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v)


def test_pauli_moments_of_maximally_entangled_state():
    M = norms.pauli_moments(2 * _bell())
    assert np.allclose(M, np.diag([2, 2, -2, 2]))
    r = norms.hat_check_membership_qubit(2 * _bell(), search_hat=False)
    assert r["trace"] == pytest.approx(2) and r["moment_block_trace_norm"] == pytest.approx(6)
    assert not r["in_check"]


def test_check_cone_examples():
    r = norms.hat_check_membership_qubit(np.eye(4))
    assert r["in_check"]
    assert np.allclose(np.array(r["moments"])[1:, 1:], 0)
    assert r["in_hat_evidence"] is not None
    rng = np.random.default_rng(8)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = np.kron(a @ a.conj().T, b @ b.conj().T)
    assert norms.hat_check_membership_qubit(rho, search_hat=False)["in_check"]


def test_cone_sandwich_on_separable_states():
    rng = np.random.default_rng(9)
    for _ in range(10):
        Z = np.zeros((4, 4), dtype=complex)
        for _ in range(3):
            u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            w = np.kron(u, v)
            Z += np.outer(w, w.conj())
        r = norms.hat_check_membership_qubit(Z)
        assert r["in_check"]
        assert r["in_hat_evidence"] is not None


def test_block_positivity_finds_negative_product():
    M = np.diag([1.0, -2.0, 0.0, 0.0])
    r = norms.qubit_block_positivity(M)
    u, v = np.r_[1, r["u"]], np.r_[1, r["v"]]
    assert r["minimum"] == pytest.approx(u @ M @ v)
    assert r["minimum"] == pytest.approx(-1.0)


def test_transfer_examples():
    r = norms.transfer_check(2.0, np.eye(2), l2(2), l2(2), 2, samples=50)
    assert r["applicable"] and not r["violations"]
    # the witness has pi-norm 2 and eps-norm 1 against alpha^k = 4
    assert r["max_ratio"] == pytest.approx(0.5, abs=1e-9)
    r = norms.transfer_check(0.5, np.zeros((2, 2)), l1(2), l1(2), 2, samples=20)
    assert r["applicable"] and r["max_ratio"] == 0.0
    r = norms.transfer_check(3.0, np.eye(3), l1(3), l1(3), 2, samples=20)
    assert r["applicable"] and not r["violations"]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        norms.SpaceDescriptor("l3", 2)
    with pytest.raises(ValueError):
        norms.injective_norm(np.zeros((2, 3)), l2(2))
