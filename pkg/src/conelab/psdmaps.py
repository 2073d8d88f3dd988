"""Linear maps between complex Hermitian matrix spaces.

Maps are real matrices acting on coordinates in the orthonormal Hermitian
basis of :mod:`conelab.jordan` (inner product Re Tr(A^dag B)). With this
convention the real tensor sum_i X_i (x) Q(X_i) of a map Q corresponds to the
operator Q itself, while the usual complex Choi matrix sum_ab E_ab (x) Q(E_ab)
corresponds to the operator Q o theta (theta = transpose).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cones
from .jordan import coords_from_matrices, hermitian_basis, matrices_from_coords

DEFAULT_TOL = 1e-9


class CanonicalFormError(ValueError):
    """The symmetric canonical form does not exist or is not unique."""


class FactorizationRefused(ValueError):
    """The spectrum does not have the one-positive-eigenvalue shape."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


@dataclass(frozen=True, eq=False)
class HermMap:
    d_in: int
    d_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.d_out ** 2, self.d_in ** 2):
            raise ValueError(f"matrix shape {m.shape} does not match d_in={self.d_in}, d_out={self.d_out}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __call__(self, X) -> np.ndarray:
        """Apply to a Hermitian matrix."""
        return matrices_from_coords(self.matrix @ coords_from_matrices(np.asarray(X)), self.d_out)

    def compose(self, other: "HermMap") -> "HermMap":
        """self o other."""
        if other.d_out != self.d_in:
            raise ValueError("dimension mismatch")
        return HermMap(other.d_in, self.d_out, self.matrix @ other.matrix)

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other):
        return HermMap(self.d_in, self.d_out, self.matrix + other.matrix)

    def __sub__(self, other):
        return HermMap(self.d_in, self.d_out, self.matrix - other.matrix)

    def __mul__(self, c):
        return HermMap(self.d_in, self.d_out, float(c) * self.matrix)

    __rmul__ = __mul__

    def as_linear_map(self) -> cones.LinearMapDense:
        return cones.LinearMapDense(self.matrix, cones.psd(self.d_in), cones.psd(self.d_out))

    def to_json(self) -> dict:
        return {"d_in": self.d_in, "d_out": self.d_out, "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "HermMap":
        return cls(int(obj["d_in"]), int(obj["d_out"]), np.array(obj["matrix"], dtype=float))


def from_function(f, d_in: int, d_out: int) -> HermMap:
    """Matrix of a (Hermiticity-preserving, real-linear) function on matrices."""
    basis = hermitian_basis(d_in)
    cols = coords_from_matrices(np.array([f(b) for b in basis]))
    return HermMap(d_in, d_out, cols.T)


def identity_map(d: int) -> HermMap:
    return HermMap(d, d, np.eye(d * d))


def choi(P: HermMap) -> np.ndarray:
    """Real Choi tensor P_hat = sum_i X_i (x) P(X_i), as a (d_in^2, d_out^2) array."""
    return P.matrix.T.copy()


def map_from_choi(t, d_in: int, d_out: int) -> HermMap:
    t = np.asarray(t, dtype=float)
    if t.shape != (d_in ** 2, d_out ** 2):
        raise ValueError("Choi tensor has the wrong shape")
    return HermMap(d_in, d_out, t.T)


def choi_matrix(M, d_in: int, d_out: int) -> np.ndarray:
    """Complex Choi matrix sum_ab E_ab (x) P(E_ab) of the map with coordinate matrix M."""
    M = np.asarray(M, dtype=float)
    Bi = hermitian_basis(d_in)
    Bo = hermitian_basis(d_out)
    images = np.einsum("jk,jce->kce", M, Bo)  # P(B_k)
    T = np.einsum("kab,kce->abce", Bi.conj(), images)  # P(E_ab)[c, e]
    D = d_in * d_out
    return T.transpose(0, 2, 1, 3).reshape(D, D)


def partial_transpose(C, d_in: int, d_out: int) -> np.ndarray:
    """Transpose on the second tensor factor."""
    return (np.asarray(C).reshape(d_in, d_out, d_in, d_out)
            .transpose(0, 3, 2, 1).reshape(d_in * d_out, d_in * d_out))


def transpose_map(d: int) -> HermMap:
    """theta_d(X) = X^T; diagonal in the fixed basis (-1 on the imaginary antisymmetric part)."""
    signs = np.ones(d * d)
    n_pairs = d * (d - 1) // 2
    signs[1 + n_pairs: 1 + 2 * n_pairs] = -1.0
    return HermMap(d, d, np.diag(signs))


def adjoint(P: HermMap) -> HermMap:
    return HermMap(P.d_out, P.d_in, P.matrix.T)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    X0: np.ndarray
    Xs: list
    lambdas: np.ndarray
    rank: int
    spectral_radius: float
    spectrum: np.ndarray  # full spectrum of the decomposed operator, descending

    def reconstruct(self) -> np.ndarray:
        """Coordinate matrix of spectral_radius * (X0 X0^T + sum lambda_i X_i X_i^T)."""
        y0 = coords_from_matrices(self.X0)
        out = np.outer(y0, y0)
        for lam, X in zip(self.lambdas, self.Xs):
            y = coords_from_matrices(X)
            out += lam * np.outer(y, y)
        return self.spectral_radius * out


def canonical_form(P: HermMap, tol: float = DEFAULT_TOL) -> CanonicalForm:
    """Symmetric decomposition of the self-adjoint operator P o theta.

    Requires P = theta o P^* o theta. The operator P o theta is eigendecomposed,
    its spectral radius must be a simple positive eigenvalue with a PSD
    eigenvector X0, and the remaining nonzero eigenvalues are reported after
    normalization by the spectral radius.
    """
    if P.d_in != P.d_out:
        raise ValueError("canonical form needs d_in = d_out")
    d = P.d_in
    T = transpose_map(d).matrix
    S = P.matrix @ T
    scale = max(np.linalg.norm(S), np.finfo(float).tiny)
    if np.linalg.norm(S - S.T) > tol * scale:
        raise CanonicalFormError("P differs from theta o P* o theta")
    S = (S + S.T) / 2
    mu, V = np.linalg.eigh(S)
    mu, V = mu[::-1], V[:, ::-1]
    R = float(np.abs(mu).max())
    if R == 0.0:
        raise CanonicalFormError("zero map")
    if mu[0] < R * (1 - tol):
        raise CanonicalFormError(
            f"spectral radius {R} is not an eigenvalue (top eigenvalue {mu[0]})")
    if len(mu) > 1 and mu[1] >= mu[0] - tol * R:
        raise CanonicalFormError(
            f"degenerate top eigenvalue: spectrum {np.round(mu, 12).tolist()}")
    y0 = V[:, 0]
    X0 = matrices_from_coords(y0, d)
    if np.trace(X0).real < 0:
        y0, X0 = -y0, -X0
    if np.linalg.eigvalsh(X0).min() < -tol * np.linalg.norm(y0):
        raise CanonicalFormError("top eigenvector is not positive semidefinite")
    lam = mu / R
    keep = [i for i in range(1, len(mu)) if abs(lam[i]) > tol]
    Xs = [matrices_from_coords(V[:, i], d) for i in keep]
    cf = CanonicalForm(X0, Xs, lam[keep], 1 + len(keep), R, mu)
    if np.linalg.norm(cf.reconstruct() - S) > 1e-10 * max(1.0, scale):  # pragma: no cover
        raise CanonicalFormError("reconstruction failed")
    return cf


@dataclass(frozen=True, eq=False)
class LorentzFactorization:
    """P = alpha o A o alpha^* with alpha : R^{k+1} -> Hermitian coordinates."""

    k: int
    alpha_map: np.ndarray  # (d^2, k+1)
    A: np.ndarray  # diag(1, -1, ..., -1)
    residual: float
    d: int
    eigenvalues: np.ndarray  # spectrum of P
    theta_eigenvalues: np.ndarray  # spectrum of P o theta
    positivity_min_eig: float = float("nan")

    def map_matrix(self) -> np.ndarray:
        return self.alpha_map @ self.A @ self.alpha_map.T

    def as_map(self) -> HermMap:
        return HermMap(self.d, self.d, self.map_matrix())

    def alpha_of(self, v) -> np.ndarray:
        return matrices_from_coords(self.alpha_map @ np.asarray(v, dtype=float), self.d)

    def to_json(self) -> dict:
        return {"k": self.k, "d": self.d, "alpha_map": self.alpha_map.tolist(),
                "residual": self.residual, "eigenvalues": self.eigenvalues.tolist(),
                "theta_eigenvalues": self.theta_eigenvalues.tolist(),
                "positivity_min_eig": self.positivity_min_eig}


def _lorentz_positivity(alpha_map: np.ndarray, d: int, rng, samples: int = 500) -> float:
    """Smallest eigenvalue of alpha(1, u), relative to ||alpha||, over sampled unit u."""
    k = alpha_map.shape[1] - 1
    pts = cones.sample_extreme_rays(cones.lorentz(k), rng, samples) if k > 0 else np.ones((1, 1))
    mats = matrices_from_coords(pts @ alpha_map.T, d)
    return float(np.linalg.eigvalsh(mats).min() / max(np.linalg.norm(alpha_map), 1e-300))


def lorentz_factorize(P: HermMap, tol: float = DEFAULT_TOL, rng=None) -> LorentzFactorization:
    """Factor a self-adjoint map through a Lorentz cone.

    The canonical form of P o theta decomposes the operator P itself as
    mu_0 Y_0 Y_0^T - sum_i mu_i Y_i Y_i^T. If every eigenvalue besides the
    spectral radius is negative, alpha(e_0) = sqrt(mu_0) Y_0 and
    alpha(e_i) = sqrt(mu_i) Y_i give P = alpha o A o alpha^*, and alpha maps
    L_k into the PSD cone.
    """
    if P.d_in != P.d_out:
        raise ValueError("factorization needs d_in = d_out")
    d = P.d_in
    theta = transpose_map(d)
    cf = canonical_form(P @ theta, tol)
    pos = [float(l) for l in cf.lambdas if l > 0]
    if pos:
        raise FactorizationRefused(
            f"second positive eigenvalue(s) {pos} after normalization", offending=pos)
    R = cf.spectral_radius
    cols = [np.sqrt(R) * coords_from_matrices(cf.X0)]
    cols += [np.sqrt(-R * l) * coords_from_matrices(X) for l, X in zip(cf.lambdas, cf.Xs)]
    alpha_map = np.column_stack(cols)
    k = alpha_map.shape[1] - 1
    A = np.diag([1.0] + [-1.0] * k)
    residual = float(np.linalg.norm(P.matrix - alpha_map @ A @ alpha_map.T))
    if residual > 1e-10 * max(1.0, np.linalg.norm(P.matrix)):  # pragma: no cover
        raise RuntimeError(f"factorization residual {residual} too large")
    rng = np.random.default_rng(0) if rng is None else rng
    theta_eigs = np.sort(np.linalg.eigvalsh((P @ theta).matrix + (P @ theta).matrix.T) / 2)[::-1]
    return LorentzFactorization(
        k, alpha_map, A, residual, d, cf.spectrum, theta_eigs,
        _lorentz_positivity(alpha_map, d, rng))


def reduction_spinor_factorization() -> LorentzFactorization:
    """Explicit factorization of the qubit reduction map through L_3.

    alpha(t, x) = (t I + x . sigma) / sqrt(2), so alpha maps L_3 onto the PSD
    cone and alpha o A o alpha^* (X) = Tr(X) I - X.
    """
    d = 2
    paulis = [np.eye(2), [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]]
    alpha_map = np.column_stack([coords_from_matrices(np.array(p, dtype=complex)) / np.sqrt(2)
                                 for p in paulis])
    A = np.diag([1.0, -1.0, -1.0, -1.0])
    R = named_map("reduction", 2)
    residual = float(np.linalg.norm(R.matrix - alpha_map @ A @ alpha_map.T))
    theta = transpose_map(d)
    return LorentzFactorization(
        3, alpha_map, A, residual, d, np.sort(np.linalg.eigvalsh(R.matrix))[::-1],
        np.sort(np.linalg.eigvalsh((R @ theta).matrix))[::-1],
        _lorentz_positivity(alpha_map, d, np.random.default_rng(0)))


def breuer_hall_embedding() -> np.ndarray:
    """The 4 x 4 matrix-valued linear map x in R^6 -> alpha(x) printed for the Breuer-Hall map.

    Returned as a (16, 6) coordinate matrix. With the trace pairing
    Re Tr(A^dag B) it satisfies alpha A alpha^* = 2 B.
    """
    def alpha(x):
        x0, x1, x2, x3, x4, x5 = x
        return np.array([
            [x0 + x5, x4 - 1j * x3, 0, x2 - 1j * x1],
            [x4 + 1j * x3, x0 - x5, -x2 + 1j * x1, 0],
            [0, -x2 - 1j * x1, x0 + x5, x4 + 1j * x3],
            [x2 + 1j * x1, 0, x4 - 1j * x3, x0 - x5],
        ])

    return np.column_stack([coords_from_matrices(alpha(e)) for e in np.eye(6)])


def _validate_spin_system(spins, tol=1e-10):
    spins = [np.asarray(s, dtype=complex) for s in spins]
    if not spins:
        raise ValueError("empty spin system")
    d = spins[0].shape[0]
    eye = np.eye(d)
    for i, s in enumerate(spins):
        if s.shape != (d, d):
            raise ValueError("spin matrices must share one square shape")
        if np.abs(s - s.conj().T).max() > tol:
            raise ValueError(f"spin {i} is not Hermitian")
        if np.abs(s @ s - eye).max() > tol:
            raise ValueError(f"spin {i} is not unitary")
        for j in range(i):
            if np.abs(s @ spins[j] + spins[j] @ s).max() > tol:
                raise ValueError(f"spins {j} and {i} do not anticommute")
    return spins, d


def named_map(name: str, param=None) -> HermMap:
    """``reduction`` (param d), ``breuer_hall`` or ``spin_projection`` (param: list of spins)."""
    if name == "reduction":
        d = int(param)
        return from_function(lambda X: np.trace(X) * np.eye(d) - X, d, d)
    if name == "breuer_hall":
        U = np.kron(np.array([[0, -1j], [1j, 0]]), np.eye(2))
        return from_function(lambda X: np.trace(X) * np.eye(4) - X - U @ X.T @ U.conj().T, 4, 4)
    if name == "spin_projection":
        spins, d = _validate_spin_system(param)

        def f(X):
            out = np.trace(X) * np.eye(d)
            for s in spins:
                out = out + np.trace(s @ X) * s
            return out / d

        return from_function(f, d, d)
    raise ValueError(f"unknown map {name!r}")


def lorentz_psd_max_membership(Xs, tol: float = 1e-8, rng=None, starts: int = 1000,
                               iters: int = 200) -> dict:
    """Test X0 >= 0 and block positivity of X0 (x) X0 - sum_s X_s (x) X_s.

    Block positivity is searched by alternating exact minimization over the
    two product factors from many random starts. A negative value always comes
    with the product vector achieving it (a sound refutation); otherwise the
    answer is heuristic and reports the smallest value found.
    """
    Xs = [np.asarray(X, dtype=complex) for X in Xs]
    d = Xs[0].shape[0]
    if d > 4:
        raise ValueError("search budget supports d <= 4")
    rng = np.random.default_rng(0) if rng is None else rng
    X0, rest = Xs[0], Xs[1:]
    M = np.kron(X0, X0) - sum((np.kron(X, X) for X in rest), np.zeros((d * d, d * d)))
    scale = max(np.linalg.norm(M), 1e-300)
    x0_min = float(np.linalg.eigvalsh(X0).min())
    if x0_min < -tol * max(np.linalg.norm(X0), 1e-300):
        return {"member": False, "heuristic": False, "minimum": x0_min, "reason": "X0 not PSD",
                "certificate": None}
    T = M.reshape(d, d, d, d)  # T[a, c, b, e] = M[(a,c),(b,e)]

    def reduce_first(y):
        return np.einsum("a,acbe,b->ce", y.conj(), T, y)

    def reduce_second(z):
        return np.einsum("c,acbe,e->ab", z.conj(), T, z)

    best, best_yz = np.inf, None
    for _ in range(starts):
        y = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        y /= np.linalg.norm(y)
        val = np.inf
        for _ in range(iters):
            w, v = np.linalg.eigh(reduce_first(y))
            z = v[:, 0]
            w, v = np.linalg.eigh(reduce_second(z))
            y = v[:, 0]
            new = float(w[0])
            if new >= val - 1e-15 * scale:
                val = min(val, new)
                break
            val = new
        if val < best:
            best, best_yz = val, (y, z)
    y, z = best_yz
    out = {"member": bool(best >= -tol * scale), "heuristic": True, "minimum": best,
           "y": y, "z": z, "certificate": None}
    if not out["member"]:
        out["heuristic"] = False
        out["certificate"] = cones.Certificate("membership_max_violation", {
            "test": "product_vector",
            "tensors": {"M_re": M.real.tolist(), "M_im": M.imag.tolist(),
                        "y_re": y.real.tolist(), "y_im": y.imag.tolist(),
                        "z_re": z.real.tolist(), "z_im": z.imag.tolist()},
            "value": best,
            "tolerances": {"tol": tol * scale},
            "seed": None,
        })
    return out


def generalized_reduction_check(P: HermMap, Q, tol: float = 1e-9) -> dict:
    """Necessary entanglement-breaking tests on Q o P.

    ``Q`` is a :class:`LorentzFactorization` (its map alpha o A o alpha^* is
    used) or a :class:`HermMap`. The Choi matrix of Q o P must be PSD and have
    PSD partial transpose; a failure yields an ``eb_violation`` certificate,
    meaning P is not entanglement annihilating.
    """
    Qm = Q.map_matrix() if isinstance(Q, LorentzFactorization) else Q.matrix
    d_q_in = int(round(np.sqrt(Qm.shape[1])))
    if d_q_in != P.d_out:
        raise ValueError("dimension mismatch between P and Q")
    d_out = int(round(np.sqrt(Qm.shape[0])))
    comp = Qm @ P.matrix
    C = choi_matrix(comp, P.d_in, d_out)
    choi_min = float(np.linalg.eigvalsh(C).min())
    ppt_min = float(np.linalg.eigvalsh(partial_transpose(C, P.d_in, d_out)).min())
    scale = max(1.0, np.linalg.norm(C))
    failed = None
    if choi_min < -tol * scale:
        failed, val = "choi_psd", choi_min
    elif ppt_min < -tol * scale:
        failed, val = "choi_ppt", ppt_min
    cert = None
    if failed:
        cert = cones.Certificate("eb_violation", {
            "failed_test": failed,
            "min_eigenvalue": val,
            "d_in": P.d_in,
            "d_out": d_out,
            "composite_matrix": comp.tolist(),
            "tolerances": {"tol": tol * scale},
            "seed": None,
        })
    return {"choi_min_eig": choi_min, "ppt_min_eig": ppt_min, "failed_test": failed,
            "certificate": cert}


def random_positive_map(d: int, rng, kraus: int = 3, delta: float = 0.1) -> HermMap:
    """X -> sum K_i X K_i^dag + delta Tr(X) I (completely positive, strictly positive if delta > 0)."""
    Ks = rng.standard_normal((kraus, d, d)) + 1j * rng.standard_normal((kraus, d, d))
    Ks /= np.sqrt(kraus * d)

    def f(X):
        return np.einsum("kab,bc,kdc->ad", Ks, X, Ks.conj()) + delta * np.trace(X) * np.eye(d)

    return from_function(f, d, d)
