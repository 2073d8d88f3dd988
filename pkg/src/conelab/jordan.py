"""Euclidean Jordan algebras in coordinates.

Two families are supported:

* the spin factor J(R^n) on R^{n+1} with product
  (s, x) o (t, y) = (st + <x, y>, sy + tx), whose cone of squares is L_n;
* complex Hermitian d x d matrices with product (AB + BA)/2 and inner
  product Re Tr(A^dag B), whose cone of squares is the PSD cone.

Hermitian coordinates refer to the orthonormal basis returned by
:func:`hermitian_basis`. Its order is fixed:

1. ``I / sqrt(d)``;
2. ``(E_jk + E_kj) / sqrt(2)`` for j < k in lexicographic order;
3. ``(-i E_jk + i E_kj) / sqrt(2)`` for j < k in lexicographic order;
4. ``(E_00 + ... + E_{l-1,l-1} - l E_ll) / sqrt(l (l + 1))`` for l = 1..d-1.

For d = 2 this is (I, sigma_x, sigma_y, sigma_z) / sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linmap import ConeHandle, LinearMapDense

DEFAULT_TOL = 1e-9


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian matrices, shape (d*d, d, d)."""
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        basis.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        basis.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1
        m[l, l] = -l
        basis.append(m / np.sqrt(l * (l + 1)))
    out = np.array(basis)
    out.setflags(write=False)
    return out


def coords_from_matrices(mats: np.ndarray) -> np.ndarray:
    """Coordinates of Hermitian matrix (or stack of matrices) in the fixed basis."""
    mats = np.asarray(mats)
    d = mats.shape[-1]
    basis = hermitian_basis(d)
    return np.einsum("kab,...ab->...k", basis.conj(), mats).real


def matrices_from_coords(coords: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`coords_from_matrices`."""
    return np.einsum("...k,kab->...ab", np.asarray(coords, dtype=float), hermitian_basis(d))


@dataclass(frozen=True)
class AlgebraDescriptor:
    """``kind`` is ``"spin"`` (param n) or ``"hermitian"`` (param d)."""

    kind: str
    param: int

    def __post_init__(self):
        if self.kind not in ("spin", "hermitian"):
            raise ValueError(f"unknown algebra kind {self.kind!r}")
        if int(self.param) < 1:
            raise ValueError("algebra parameter must be positive")

    @property
    def ambient_dim(self) -> int:
        return self.param + 1 if self.kind == "spin" else self.param ** 2

    @property
    def rank(self) -> int:
        return 2 if self.kind == "spin" else self.param

    @property
    def identity(self) -> "JordanElement":
        return JordanElement(self, _identity_coords(self))

    @property
    def cone(self) -> ConeHandle:
        """The cone of squares as a cone handle."""
        if self.kind == "spin":
            return ConeHandle("lorentz", self.param)
        return ConeHandle("psd", self.param)

    def element(self, coords) -> "JordanElement":
        return JordanElement(self, coords)

    def from_matrix(self, m) -> "JordanElement":
        if self.kind != "hermitian":
            raise ValueError("from_matrix requires a hermitian algebra")
        m = np.asarray(m)
        if np.abs(m - m.conj().T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(m).max()):
            raise ValueError("matrix is not Hermitian")
        return JordanElement(self, coords_from_matrices(m))

    def to_json(self) -> dict:
        return {"kind": self.kind, "param": int(self.param)}

    @classmethod
    def from_json(cls, obj: dict) -> "AlgebraDescriptor":
        return cls(obj["kind"], int(obj["param"]))


def spin(n: int) -> AlgebraDescriptor:
    return AlgebraDescriptor("spin", n)


def hermitian(d: int) -> AlgebraDescriptor:
    return AlgebraDescriptor("hermitian", d)


def algebra_of_cone(cone: ConeHandle) -> AlgebraDescriptor:
    if cone.kind == "lorentz" and cone.param >= 1:
        return spin(cone.param)
    if cone.kind == "psd":
        return hermitian(cone.param)
    raise ValueError(f"cone {cone} is not a symmetric cone handled by a Jordan algebra")


def _identity_coords(alg: AlgebraDescriptor) -> np.ndarray:
    e = np.zeros(alg.ambient_dim)
    e[0] = 1.0 if alg.kind == "spin" else np.sqrt(alg.param)
    return e


@dataclass(frozen=True, eq=False)
class JordanElement:
    algebra: AlgebraDescriptor
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape != (self.algebra.ambient_dim,):
            raise ValueError(
                f"expected {self.algebra.ambient_dim} coordinates, got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def _check(self, other):
        if not isinstance(other, JordanElement):
            raise TypeError("expected a JordanElement")
        if other.algebra != self.algebra:
            raise ValueError("algebra mismatch")

    def __add__(self, other):
        self._check(other)
        return JordanElement(self.algebra, self.coords + other.coords)

    def __sub__(self, other):
        self._check(other)
        return JordanElement(self.algebra, self.coords - other.coords)

    def __neg__(self):
        return JordanElement(self.algebra, -self.coords)

    def __mul__(self, c):
        return JordanElement(self.algebra, float(c) * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return JordanElement(self.algebra, self.coords / float(c))

    def inner(self, other) -> float:
        self._check(other)
        return float(self.coords @ other.coords)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def matrix(self) -> np.ndarray:
        if self.algebra.kind != "hermitian":
            raise ValueError("matrix() requires a hermitian algebra")
        return matrices_from_coords(self.coords, self.algebra.param)

    def to_json(self) -> dict:
        return {"algebra": self.algebra.to_json(), "coords": self.coords.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "JordanElement":
        return cls(AlgebraDescriptor.from_json(obj["algebra"]), obj["coords"])


@dataclass(frozen=True, eq=False)
class SpectralData:
    frame: list
    eigenvalues: np.ndarray

    def reconstruct(self) -> JordanElement:
        alg = self.frame[0].algebra
        coords = sum(l * c.coords for l, c in zip(self.eigenvalues, self.frame))
        return JordanElement(alg, coords)


# ---------------------------------------------------------------------------
# array-level kernels (coordinates in, coordinates out)


def product_coords(alg: AlgebraDescriptor, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if alg.kind == "spin":
        out = np.empty(np.broadcast_shapes(a.shape, b.shape))
        out[..., 0] = a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)
        out[..., 1:] = a[..., :1] * b[..., 1:] + b[..., :1] * a[..., 1:]
        return out
    d = alg.param
    A = matrices_from_coords(a, d)
    B = matrices_from_coords(b, d)
    return coords_from_matrices((A @ B + B @ A) / 2)


def eig_coords(alg: AlgebraDescriptor, a: np.ndarray):
    """Eigenvalues (descending) and Jordan frame coordinates (rows) of ``a``."""
    a = np.asarray(a, dtype=float)
    if alg.kind == "spin":
        t, x = a[0], a[1:]
        r = np.linalg.norm(x)
        if r > 0:
            u = x / r
        else:
            u = np.zeros_like(x)
            u[0] = 1.0
        lam = np.array([t + r, t - r])
        frame = np.empty((2, a.size))
        frame[:, 0] = 0.5
        frame[0, 1:] = 0.5 * u
        frame[1, 1:] = -0.5 * u
        return lam, frame
    d = alg.param
    try:
        w, v = np.linalg.eigh(matrices_from_coords(a, d))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"Hermitian eigensolver failed: {exc}") from exc
    w = w[::-1]
    v = v[:, ::-1]
    projectors = np.einsum("ar,br->rab", v, v.conj())
    return w, coords_from_matrices(projectors)


def function_coords(alg: AlgebraDescriptor, a: np.ndarray, f) -> np.ndarray:
    """Spectral calculus: sum_i f(lambda_i) c_i."""
    lam, frame = eig_coords(alg, a)
    return f(lam) @ frame


def inverse_coords(alg: AlgebraDescriptor, a: np.ndarray) -> np.ndarray:
    """Jordan inverse without invertibility checks (used in inner loops)."""
    if alg.kind == "spin":
        det = a[0] ** 2 - a[1:] @ a[1:]
        out = -a / det
        out[0] = a[0] / det
        return out
    d = alg.param
    return coords_from_matrices(np.linalg.inv(matrices_from_coords(a, d)))


def sqrt_coords(alg: AlgebraDescriptor, a: np.ndarray) -> np.ndarray:
    return function_coords(alg, a, lambda lam: np.sqrt(np.maximum(lam, 0.0)))


def left_mult_matrix(alg: AlgebraDescriptor, a: np.ndarray) -> np.ndarray:
    """Matrix of L_a : y -> a o y."""
    a = np.asarray(a, dtype=float)
    if alg.kind == "spin":
        n = alg.param
        L = a[0] * np.eye(n + 1)
        L[0, 1:] = a[1:]
        L[1:, 0] = a[1:]
        return L
    d = alg.param
    A = matrices_from_coords(a, d)
    B = hermitian_basis(d)
    cols = coords_from_matrices((A @ B + B @ A) / 2)
    return cols.T


def quadratic_matrix(alg: AlgebraDescriptor, a: np.ndarray) -> np.ndarray:
    """Matrix of Q_a = 2 L_a^2 - L_{a^2}."""
    L = left_mult_matrix(alg, a)
    L2 = left_mult_matrix(alg, product_coords(alg, a, a))
    Q = 2 * L @ L - L2
    return (Q + Q.T) / 2


def _scale(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


# ---------------------------------------------------------------------------
# public operations


def jordan_product(a: JordanElement, b: JordanElement) -> JordanElement:
    a._check(b)
    return JordanElement(a.algebra, product_coords(a.algebra, a.coords, b.coords))


def spectral_decompose(a: JordanElement) -> SpectralData:
    lam, frame = eig_coords(a.algebra, a.coords)
    return SpectralData([JordanElement(a.algebra, c) for c in frame], lam)


def det_inv(a: JordanElement, tol: float = DEFAULT_TOL) -> dict:
    """Determinant and (when it exists) inverse.

    The inverse is returned when ``|det| > tol * ||a||^rank``, i.e. the
    threshold is relative to the element's scale.
    """
    lam, frame = eig_coords(a.algebra, a.coords)
    det = float(np.prod(lam))
    scale = max(_scale(a.coords), np.finfo(float).tiny) ** a.algebra.rank
    inverse = None
    if abs(det) > tol * scale and np.all(lam != 0):
        inverse = JordanElement(a.algebra, (1.0 / lam) @ frame)
    return {"det": det, "inverse": inverse}


def quadratic_rep(x: JordanElement) -> LinearMapDense:
    cone = x.algebra.cone
    return LinearMapDense(quadratic_matrix(x.algebra, x.coords), cone, cone)


def left_mult(x: JordanElement) -> LinearMapDense:
    cone = x.algebra.cone
    return LinearMapDense(left_mult_matrix(x.algebra, x.coords), cone, cone)


def parts(a: JordanElement, tol: float = DEFAULT_TOL) -> dict:
    """Positive part, negative part, absolute value and square root.

    The square root is ``None`` if some eigenvalue is below ``-tol * ||a||``;
    eigenvalues in ``[-tol * ||a||, 0)`` are clamped to zero.
    """
    alg = a.algebra
    lam, frame = eig_coords(alg, a.coords)
    pos = np.maximum(lam, 0.0) @ frame
    neg = np.maximum(-lam, 0.0) @ frame
    thr = tol * _scale(a.coords)
    root = None
    if lam.min() >= -thr:
        root = JordanElement(alg, np.sqrt(np.maximum(lam, 0.0)) @ frame)
    return {
        "pos": JordanElement(alg, pos),
        "neg": JordanElement(alg, neg),
        "abs": JordanElement(alg, pos + neg),
        "sqrt": root,
    }


def min_eigenvalue(a: JordanElement) -> float:
    return float(eig_coords(a.algebra, a.coords)[0].min())


def in_cone(a: JordanElement, tol: float = DEFAULT_TOL) -> bool:
    """True iff the smallest eigenvalue is >= -tol * ||a|| (zero is in the cone)."""
    return min_eigenvalue(a) >= -tol * _scale(a.coords)


def random_element(alg: AlgebraDescriptor, rng: np.random.Generator, scale=1.0) -> JordanElement:
    return JordanElement(alg, scale * rng.standard_normal(alg.ambient_dim))


def random_cone_element(alg: AlgebraDescriptor, rng: np.random.Generator) -> JordanElement:
    """A random square x^2, i.e. a random point of the cone."""
    x = rng.standard_normal(alg.ambient_dim)
    return JordanElement(alg, product_coords(alg, x, x))
