"""Hurwitz-Radon families and the witness tensors built from them.

A family A_1, ..., A_n of real N x N matrices with
Theta(x)^T Theta(x) = ||x||^2 I for Theta(x) = sum_i x_i A_i gives, for every
(i, j), a tensor z(i, j) in (R^n)^{(x)k} with entries
[A_{l_1} ... A_{l_k}]_{ij}. Its injective norm over l2 is at most 1 and the
squared norms of all N^2 tensors add up to N n^k.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .compalg import algebra

MAX_N = 16
BUDGET = 10 ** 8

_X = np.array([[0, 1], [1, 0]], dtype=np.int64)
_J = np.array([[0, -1], [1, 0]], dtype=np.int64)
_Z = np.array([[1, 0], [0, -1]], dtype=np.int64)


def rho(N: int) -> int:
    """Radon-Hurwitz number: rho(2^(4a+b) * odd) = 8a + 2^b, 0 <= b <= 3."""
    if N < 1:
        raise ValueError("N must be positive")
    e = 0
    while N % 2 == 0:
        N //= 2
        e += 1
    a, b = divmod(e, 4)
    return 8 * a + 2 ** b


def N_of(n: int) -> int:
    """Smallest N admitting n matrices with the Hurwitz-Radon property."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}]")
    N = 1
    while rho(N) < n:
        N *= 2
    return N


@dataclass(frozen=True, eq=False)
class HurwitzFamily:
    n: int
    N: int
    mats: np.ndarray  # shape (n, N, N), integer entries

    def theta(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=float), self.mats, axes=(0, 0))

    def gram(self) -> np.ndarray:
        """(1/N) Tr(A_i^T A_j)."""
        return np.einsum("iab,jab->ij", self.mats, self.mats) / self.N


def _left_mult(kind: str) -> np.ndarray:
    """Left multiplication matrices L_{e_i}[k, j] = mult[i, j, k]."""
    t = algebra(kind).mult
    return np.transpose(t, (0, 2, 1)).astype(np.int64)


def _skew_generators(n: int) -> list[np.ndarray]:
    """n - 1 pairwise anticommuting skew-symmetric orthogonal matrices of size N_of(n)."""
    if n == 1:
        return []
    if n <= 8:
        kind = "C" if n == 2 else "H" if n <= 4 else "O"
        return list(_left_mult(kind)[1:n])
    # Eight generators of size 16 together with a symmetric involution omega
    # anticommuting with all of them; base generators B are tensored with omega.
    octo = _left_mult("O")
    big = [np.kron(o, _Z) for o in octo[1:]] + [np.kron(np.eye(8, dtype=np.int64), _J)]
    omega = np.kron(np.eye(8, dtype=np.int64), _X)
    base = _skew_generators(n - 8)
    size = base[0].shape[0] if base else 1
    lifted = [np.kron(np.eye(size, dtype=np.int64), g) for g in big]
    return [np.kron(b, omega) for b in base] + lifted


@lru_cache(maxsize=None)
def build_family(n: int) -> HurwitzFamily:
    N = N_of(n)
    gens = _skew_generators(n)
    mats = np.array([np.eye(N, dtype=np.int64)] + [g for g in gens], dtype=np.int64)
    if mats.shape != (n, N, N):  # pragma: no cover - construction invariant
        raise RuntimeError(f"family has shape {mats.shape}, expected {(n, N, N)}")
    mats.setflags(write=False)
    return HurwitzFamily(n, N, mats)


@dataclass(frozen=True, eq=False)
class WitnessTensor:
    n: int
    k: int
    coords: np.ndarray
    sq_norm: float
    source: tuple
    N: int
    total_sq_norm: int

    def flat(self) -> dict:
        return {"shape": list(self.coords.shape), "index_order": "row-major",
                "data": self.coords.reshape(-1).tolist()}


def word_products(fam: HurwitzFamily, k: int) -> np.ndarray:
    """All products A_{l1} ... A_{lk}, shape (n,)*k + (N, N), integer entries."""
    n, N = fam.n, fam.N
    if n ** k * N * N * max(N, 1) > BUDGET:
        raise ValueError(f"(n, k) = ({n}, {k}) exceeds the witness budget")
    T = fam.mats.copy()
    for _ in range(k - 1):
        T = np.einsum("...ip,lpj->...lij", T, fam.mats)
    return T


def witness_tensor(n: int, k: int) -> WitnessTensor:
    fam = build_family(n)
    T = word_products(fam, k)
    N = fam.N
    sq = (T * T).reshape(-1, N, N).sum(axis=0)
    total = int(sq.sum())
    if total != N * n ** k:  # pragma: no cover - exact identity
        raise RuntimeError(f"sum of squared norms {total} != {N * n ** k}")
    i0, j0 = np.unravel_index(int(np.argmax(sq)), sq.shape)
    coords = T[..., i0, j0].astype(float)
    best = int(sq[i0, j0])
    if best * N < n ** k:  # pragma: no cover - pigeonhole
        raise RuntimeError("selected witness below the guaranteed norm")
    coords.setflags(write=False)
    return WitnessTensor(n, k, coords, float(best), (int(i0), int(j0)), N, total)


def embed(z: np.ndarray) -> np.ndarray:
    """Embed a tensor on (R^n)^{(x)k} into (R^{n+1})^{(x)k} (index shift by one)."""
    k = z.ndim
    out = np.zeros(tuple(s + 1 for s in z.shape))
    out[(slice(1, None),) * k] = z
    return out


def e0_power(n: int, k: int) -> np.ndarray:
    out = np.zeros((n + 1,) * k)
    out[(0,) * k] = 1.0
    return out


def lorentz_witness_pair(n: int, k: int) -> dict:
    """z^+- = e0^{(x)k} +- z_{n,k} as tensors over R^{n+1}."""
    w = witness_tensor(n, k)
    z = embed(w.coords)
    e = e0_power(n, k)
    return {"z_plus": e + z, "z_minus": e - z, "sq_norm": w.sq_norm, "witness": w}


def witness_pairing(alpha: float, beta: float, k: int, sq_norm: float, sign: int) -> float:
    """Closed-form pairing of witness tensors through I_{a,b}^{(x)k}.

    sign = +1 pairs opposite tensors, <z^-+, I z^+->, giving alpha^k - beta^k ||z||^2;
    sign = -1 pairs equal ones, <z^+-, I z^+->, giving alpha^k + beta^k ||z||^2.
    """
    return alpha ** k - sign * beta ** k * sq_norm


def eb_bound_from_witness(n: int, alpha: float, beta: float, k_list) -> list[dict]:
    """Necessary conditions alpha >= |beta| n N^{-1/k} for k-level annihilation.

    A final row with k = "inf" gives the limit alpha >= |beta| n.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    N = N_of(n)
    rows = []
    for k in k_list:
        factor = n * N ** (-1.0 / k)
        rows.append({
            "k": int(k),
            "factor": factor,
            "required_alpha": abs(beta) * factor,
            "satisfied": bool(alpha >= abs(beta) * factor),
        })
    rows.append({"k": "inf", "factor": float(n), "required_alpha": abs(beta) * n,
                 "satisfied": bool(alpha >= abs(beta) * n)})
    return rows
