"""Real composition algebras and the direct-sum distillation protocol on L_N.

Multiplication tables are integer tensors ``mult[i, j, k]`` with
e_i * e_j = sum_k mult[i, j, k] e_k. The quaternions and octonions come from
Cayley-Dickson doubling, (a, b)(c, d) = (ac - conj(d) b, da + b conj(c)),
starting from C; the split-complex numbers have j * j = +1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import cones

KINDS = ("R", "C", "Csplit", "H", "O")


def _double(mult: np.ndarray) -> np.ndarray:
    """Cayley-Dickson doubling of a table whose basis is (1, imaginary units)."""
    n = mult.shape[0]
    conj = -np.eye(n, dtype=np.int64)
    conj[0, 0] = 1

    def mul(x, y):
        return np.einsum("i,j,ijk->k", x, y, mult)

    out = np.zeros((2 * n, 2 * n, 2 * n), dtype=np.int64)
    eye = np.eye(2 * n, dtype=np.int64)
    for p in range(2 * n):
        a, b = eye[p, :n], eye[p, n:]
        for q in range(2 * n):
            c, d = eye[q, :n], eye[q, n:]
            first = mul(a, c) - mul(conj @ d, b)
            second = mul(d, a) + mul(b, conj @ c)
            out[p, q] = np.concatenate([first, second])
    return out


@lru_cache(maxsize=None)
def _table(kind: str) -> np.ndarray:
    if kind == "R":
        t = np.ones((1, 1, 1), dtype=np.int64)
    elif kind == "C":
        t = np.zeros((2, 2, 2), dtype=np.int64)
        t[0, 0, 0] = t[0, 1, 1] = t[1, 0, 1] = 1
        t[1, 1, 0] = -1
    elif kind == "Csplit":
        t = np.zeros((2, 2, 2), dtype=np.int64)
        t[0, 0, 0] = t[0, 1, 1] = t[1, 0, 1] = t[1, 1, 0] = 1
    elif kind == "H":
        t = _double(_table("C"))
    elif kind == "O":
        t = _double(_table("H"))
    else:
        raise ValueError(f"unknown composition algebra {kind!r}")
    t.setflags(write=False)
    return t


@dataclass(frozen=True, eq=False)
class CompositionAlgebra:
    kind: str
    dim: int
    mult: np.ndarray
    qform: np.ndarray

    @property
    def is_division(self) -> bool:
        return self.kind != "Csplit"

    def q(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.qform * x * x))

    def unit(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def mult_matrix(self) -> np.ndarray:
        """m as an integer dim x dim^2 matrix acting on row-major x (x) y."""
        return self.mult.reshape(self.dim * self.dim, self.dim).T.copy()


def algebra(kind: str) -> CompositionAlgebra:
    t = _table(kind)
    dim = t.shape[0]
    qform = np.ones(dim, dtype=np.int64)
    if kind == "Csplit":
        qform[1] = -1
    return CompositionAlgebra(kind, dim, t, qform)


def multiply(A: CompositionAlgebra, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != A.dim or y.shape[-1] != A.dim:
        raise ValueError(f"{A.kind} elements have {A.dim} coordinates")
    return np.einsum("...i,...j,ijk->...k", x, y, A.mult)


@dataclass(frozen=True, eq=False)
class ProtocolCone:
    """The cone {(x1, x2) : q2(x2) <= q1(x1), x1[0] >= 0} in R^{dim1 + dim2}.

    Coordinates are (x1, x2). Because both quadratic forms are diagonal with
    entries +-1 and only x1[0] carries a positive sign, these coordinates are
    already Lorentz coordinates (t, base) with t = x1[0]; ``to_lorentz`` is
    the identity and is kept explicit for reproducibility.
    """

    alg1: CompositionAlgebra
    alg2: CompositionAlgebra
    N: int = field(init=False)
    to_lorentz: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.alg1.kind not in ("R", "Csplit"):
            raise ValueError("alg1 must be R or Csplit")
        if self.alg2.kind not in ("R", "C", "H", "O"):
            raise ValueError("alg2 must be a division algebra")
        N = self.alg1.dim + self.alg2.dim - 1
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "to_lorentz", np.eye(N + 1))

    @property
    def n(self) -> int:
        return self.alg2.dim

    @property
    def cone(self) -> cones.ConeHandle:
        return cones.lorentz(self.N)

    def quadratic(self, v) -> float:
        v = np.asarray(v, dtype=float)
        d1 = self.alg1.dim
        return self.alg1.q(v[:d1]) - self.alg2.q(v[d1:])


def protocol_cone(kind1: str, kind2: str) -> ProtocolCone:
    return ProtocolCone(algebra(kind1), algebra(kind2))


def direct_sum_map(P: ProtocolCone) -> np.ndarray:
    """Matrix of m1 (+) m2 : R^{N+1} (x) R^{N+1} -> R^{N+1} (row-major tensors)."""
    D = P.N + 1
    d1 = P.alg1.dim
    M = np.zeros((D, D, D))
    M[:d1, :d1, :d1] = P.alg1.mult
    M[d1:, d1:, d1:] = P.alg2.mult
    T = P.to_lorentz
    M = np.einsum("abc,ia,jb,kc->ijk", M, T, T, T)
    return M.reshape(D * D, D).T


def protocol_step(P: ProtocolCone, alpha: float, beta: float) -> tuple[float, float]:
    """Closed-form twirl of (m (+) m) I_{a,b}^{(x)2} (m (+) m)^*."""
    n = P.n
    if P.alg1.kind == "R":
        return alpha ** 2, n * beta ** 2
    return alpha ** 2 + beta ** 2, (2 * alpha * beta + beta ** 2 * n ** 2) / (n + 1)


def protocol_step_matrix(P: ProtocolCone, alpha: float, beta: float) -> tuple[float, float]:
    """Same quantity computed from the explicit matrices."""
    M = direct_sum_map(P)
    iso = cones.IsotropicMap(alpha, beta, P.N).matrix()
    J = M @ np.kron(iso, iso) @ M.T
    t = cones.twirl(J)
    return t.alpha, t.beta


def protocol_ratio(P: ProtocolCone, beta: float) -> float:
    """f(beta) = beta' / alpha' after one step from (1, beta)."""
    a, b = protocol_step(P, 1.0, beta)
    return b / a


def iterate(P: ProtocolCone, beta0: float, steps: int) -> list[float]:
    """Normalized trajectory beta_t / alpha_t starting from (1, beta0)."""
    traj = [float(beta0)]
    b = float(beta0)
    for _ in range(steps):
        b = protocol_ratio(P, b)
        traj.append(b)
    return traj


def protocol_threshold(P: ProtocolCone, tol: float = 1e-12, grid: int = 1000) -> float:
    """Smallest positive root of f(beta) - beta in (0, 1], by bracketing and bisection.

    The trivial root beta = 0 is removed by working with h(beta) = f(beta)/beta - 1.
    If h has no root in (0, 1), 1 is returned when h <= 0 on the whole range.
    """

    def h(b):
        return protocol_ratio(P, b) / b - 1.0

    betas = np.arange(1, grid + 1) / grid
    vals = np.array([h(b) for b in betas])
    s0 = np.sign(vals[0])
    if vals[0] == 0.0:
        return float(betas[0])
    lo = hi = None
    for j in range(1, grid):
        if vals[j] == 0.0:
            return float(betas[j])
        if np.sign(vals[j]) != s0:
            lo, hi = betas[j - 1], betas[j]
            break
    if lo is None:
        if np.all(vals <= 0):
            return 1.0
        raise RuntimeError("no sign change of f(beta) - beta in (0, 1]")
    flo = h(lo)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = h(mid)
        if fm == 0.0:
            return float(mid)
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    else:  # pragma: no cover
        raise RuntimeError("bisection did not converge")
    return float(0.5 * (lo + hi))


def sample_cone_points(P: ProtocolCone, rng: np.random.Generator, m: int, boundary=False):
    """m random points of the protocol cone (on its boundary if requested)."""
    D = P.N + 1
    base = rng.standard_normal((m, D - 1))
    r = np.linalg.norm(base, axis=1)
    t = r if boundary else r * (1 + rng.exponential(size=m))
    return np.column_stack([t, base]) @ P.to_lorentz.T
