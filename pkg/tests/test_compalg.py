import numpy as np
import pytest

from conelab import compalg, cones

PAIRS = [(a1, a2) for a1 in ("R", "Csplit") for a2 in ("R", "C", "H", "O")]
PAIRS = [p for p in PAIRS if p != ("Csplit", "R")]


def test_quaternion_product():
    H = compalg.algebra("H")
    x, y = np.array([1.0, 1, 0, 0]), np.array([0.0, 0, 1, 0])
    assert np.allclose(compalg.multiply(H, x, y), [0, 0, 1, 1])
    assert H.q(compalg.multiply(H, x, y)) == pytest.approx(H.q(x) * H.q(y)) == 2.0


def test_split_complex_product():
    S = compalg.algebra("Csplit")
    j = np.array([0.0, 1])
    assert np.allclose(compalg.multiply(S, [1.0, 0], j), j)
    assert np.allclose(compalg.multiply(S, j, j), [1, 0])
    assert S.q(j) == -1.0 and not S.is_division


@pytest.mark.parametrize("kind", compalg.KINDS)
def test_unit_and_composition_law(kind):
    A = compalg.algebra(kind)
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((1000, A.dim))
    ys = rng.standard_normal((1000, A.dim))
    for y in ys[:10]:
        assert np.allclose(compalg.multiply(A, A.unit(), y), y)
        assert np.allclose(compalg.multiply(A, y, A.unit()), y)
    prods = compalg.multiply(A, xs, ys)
    qp = np.einsum("i,ni->n", A.qform, prods ** 2)
    qq = np.einsum("i,ni->n", A.qform, xs ** 2) * np.einsum("i,ni->n", A.qform, ys ** 2)
    assert np.abs(qp - qq).max() <= 1e-12 * max(1.0, np.abs(qq).max())


@pytest.mark.parametrize("kind", ["R", "C", "H", "O"])
def test_multiplication_map_is_coisometry(kind):
    A = compalg.algebra(kind)
    m = A.mult_matrix()
    assert m.dtype.kind == "i"
    assert np.array_equal(m @ m.T, A.dim * np.eye(A.dim, dtype=np.int64))


def test_octonions_are_not_associative():
    O = compalg.algebra("O")
    e = np.eye(8)
    lhs = compalg.multiply(O, compalg.multiply(O, e[1], e[2]), e[4])
    rhs = compalg.multiply(O, e[1], compalg.multiply(O, e[2], e[4]))
    assert not np.allclose(lhs, rhs)


def test_unknown_algebra():
    with pytest.raises(ValueError):
        compalg.algebra("S")
    with pytest.raises(ValueError):
        compalg.protocol_cone("C", "R")


@pytest.mark.parametrize("pair", PAIRS, ids="-".join)
def test_direct_sum_map_preserves_unit_and_boundary(pair):
    P = compalg.protocol_cone(*pair)
    M = compalg.direct_sum_map(P)
    e = np.zeros(P.N + 1)
    e[0] = 1.0
    assert np.allclose(M @ np.kron(e, e), e)
    rng = np.random.default_rng(1)
    pts = compalg.sample_cone_points(P, rng, 50, boundary=True)
    inner = compalg.sample_cone_points(P, rng, 50)
    for a, b, c in zip(pts, pts[::-1], inner):
        out = M @ np.kron(a, b)
        assert abs(P.quadratic(out)) <= 1e-10 * max(1.0, np.linalg.norm(out) ** 2)
        assert cones.in_cone(P.cone, M @ np.kron(c, a), tol=1e-10)


def test_protocol_step_examples():
    b = 0.3
    assert compalg.protocol_step(compalg.protocol_cone("R", "H"), 1, b) == pytest.approx((1, 4 * b * b))
    assert compalg.protocol_step(compalg.protocol_cone("Csplit", "C"), 1, 0) == (1, 0)
    a2, b2 = compalg.protocol_step(compalg.protocol_cone("Csplit", "H"), 1, 0.1)
    assert a2 == pytest.approx(1.01)
    assert b2 == pytest.approx(0.36 / 5)
    assert b2 / a2 == pytest.approx(0.36 / 5.05)


@pytest.mark.parametrize("pair", PAIRS, ids="-".join)
def test_protocol_step_matches_matrix_construction(pair):
    P = compalg.protocol_cone(*pair)
    rng = np.random.default_rng(2)
    for _ in range(20):
        a, b = rng.uniform(0.1, 2), rng.uniform(-1, 1)
        closed = compalg.protocol_step(P, a, b)
        matrix = compalg.protocol_step_matrix(P, a, b)
        assert np.allclose(closed, matrix, atol=1e-10)


def test_thresholds():
    assert compalg.protocol_threshold(compalg.protocol_cone("R", "O")) == pytest.approx(0.125, abs=1e-12)
    assert compalg.protocol_threshold(compalg.protocol_cone("R", "R")) == 1.0
    assert compalg.protocol_threshold(compalg.protocol_cone("Csplit", "H")) == pytest.approx(0.2, abs=1e-12)


@pytest.mark.parametrize("pair", PAIRS, ids="-".join)
def test_threshold_equals_isotropic_eb_threshold(pair):
    P = compalg.protocol_cone(*pair)
    assert compalg.protocol_threshold(P) == pytest.approx(1 / P.N, abs=1e-10)


@pytest.mark.parametrize("pair", [p for p in PAIRS if p != ("R", "R")], ids="-".join)
def test_trapping_around_threshold(pair):
    P = compalg.protocol_cone(*pair)
    b = compalg.protocol_threshold(P)
    below = compalg.iterate(P, b - 1e-3, 200)
    assert below[-1] < 1e-12
    above = compalg.iterate(P, b + 1e-3, 5)
    assert above[1] > above[0]
