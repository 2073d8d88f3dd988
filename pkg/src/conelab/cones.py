"""Cone membership, isotropic and central maps, twirling, certificates."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.stats import ortho_group

from . import jordan
from .linmap import ConeHandle, LinearMapDense, ell1, ellinf, lorentz, psd, simplex

__all__ = [
    "ConeHandle", "LinearMapDense", "IsotropicMap", "Certificate",
    "lorentz", "psd", "ell1", "ellinf", "simplex",
    "dual_pairing", "in_cone", "max_membership_ell1_factor", "twirl",
    "twirl_monte_carlo", "isotropic_positive", "isotropic_eb",
    "central_positive", "central_eb", "central_symmetrize",
    "apply_tensor_power", "tensor_pairing", "certify_not_annihilating",
    "verify_certificate", "sample_extreme_rays", "polyhedral_max_membership",
    "polyhedral_min_membership", "sample_max_tensor", "sample_min_tensor",
]

MAX_SIGN_K = 20
DEFAULT_TOL = 1e-9


def dual_pairing(phi, x) -> float:
    phi = np.asarray(phi, dtype=float)
    x = np.asarray(x, dtype=float)
    if phi.shape != x.shape:
        raise ValueError(f"length mismatch: {phi.shape} vs {x.shape}")
    return float(np.sum(phi * x))


def _margin(C: ConeHandle, x: np.ndarray) -> float:
    """Signed distance-like quantity; x is in C iff margin >= 0."""
    if C.kind == "simplex":
        return float(x.min()) if x.size else 0.0
    if C.kind == "psd":
        return jordan.min_eigenvalue(jordan.JordanElement(jordan.hermitian(C.param), x))
    t, rest = x[0], x[1:]
    order = {"lorentz": 2, "ell1": 1, "ellinf": np.inf}[C.kind]
    return float(t - (np.linalg.norm(rest, order) if rest.size else 0.0))


def in_cone(C: ConeHandle, x, tol: float = DEFAULT_TOL) -> bool:
    """Membership with tolerance relative to ||x||_2."""
    x = np.asarray(x, dtype=float)
    if x.shape != (C.ambient_dim,):
        raise ValueError(f"expected a vector of length {C.ambient_dim}")
    return _margin(C, x) >= -tol * np.linalg.norm(x)


def max_membership_ell1_factor(C: ConeHandle, xs, tol: float = DEFAULT_TOL) -> dict:
    """Decide (x_0, ..., x_k) in C (x)max C_{l1^k}.

    The extreme rays of the dual cone C_{linf^k} are (1, s) with s a sign
    vector, so membership holds iff x_0 + sum_i s_i x_i is in C for every s.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != C.ambient_dim:
        raise ValueError("each x_i must have the cone's ambient dimension")
    k = xs.shape[0] - 1
    if k > MAX_SIGN_K:
        raise ValueError(f"k = {k} exceeds the sign enumeration cap {MAX_SIGN_K}")
    for signs in itertools.product((1.0, -1.0), repeat=k):
        s = np.array(signs)
        v = xs[0] + s @ xs[1:] if k else xs[0]
        if not in_cone(C, v, tol):
            return {"member": False, "violating_sign": s.astype(int).tolist()}
    return {"member": True, "violating_sign": None}


@dataclass(frozen=True)
class IsotropicMap:
    """alpha * pi_1 + beta * pi_2 on R^{n+1}."""

    alpha: float
    beta: float
    n: int

    def matrix(self) -> np.ndarray:
        return np.diag([self.alpha] + [self.beta] * self.n).astype(float)

    def as_map(self) -> LinearMapDense:
        return LinearMapDense(self.matrix(), lorentz(self.n), lorentz(self.n))


def _as_matrix(L) -> np.ndarray:
    return np.asarray(L.matrix if isinstance(L, LinearMapDense) else L, dtype=float)


def twirl(L) -> IsotropicMap:
    """Average of g^-1 L g over base isometries, in closed form."""
    M = _as_matrix(L)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("twirl needs a square matrix")
    n = M.shape[0] - 1
    beta = float(np.trace(M[1:, 1:]) / n) if n else 0.0
    return IsotropicMap(float(M[0, 0]), beta, n)


def _haar_orthogonal(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return rng.choice([-1.0, 1.0], size=(size, 1, 1))
    g = ortho_group.rvs(n, size=size, random_state=rng)
    return g.reshape(size, n, n)


def twirl_monte_carlo(L, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Monte-Carlo estimate of the Haar average of g^T L g, g = 1 (+) O(n)."""
    M = _as_matrix(L)
    n = M.shape[0] - 1
    G = np.zeros((samples, n + 1, n + 1))
    G[:, 0, 0] = 1.0
    G[:, 1:, 1:] = _haar_orthogonal(n, samples, rng)
    return np.einsum("sji,jk,skl->il", G, M, G) / samples


def isotropic_positive(I: IsotropicMap, tol: float = DEFAULT_TOL) -> bool:
    return abs(I.beta) <= I.alpha + tol


def isotropic_eb(I: IsotropicMap, tol: float = DEFAULT_TOL) -> bool:
    return abs(I.beta) <= I.alpha / I.n + tol


def central_positive(alpha: float, P, X, Y, tol: float = DEFAULT_TOL) -> bool:
    from .norms import operator_norm

    return operator_norm(P, X, Y) <= alpha + tol * max(1.0, abs(alpha))


def central_eb(alpha: float, P, X, Y, tol: float = DEFAULT_TOL) -> bool:
    """alpha (+) P is entanglement breaking iff ||P||_N <= alpha.

    Raises ``RuntimeError`` if the nuclear norm is only bracketed and alpha
    falls inside the bracket.
    """
    from .norms import nuclear_norm

    res = nuclear_norm(P, X, Y)
    slack = tol * max(1.0, abs(alpha))
    if res["exact"]:
        return res["value"] <= alpha + slack
    if res["upper"] <= alpha + slack:
        return True
    if res["lower"] > alpha + slack:
        return False
    raise RuntimeError(
        f"undecided: nuclear norm in [{res['lower']}, {res['upper']}], alpha = {alpha}"
    )


def central_symmetrize(L) -> LinearMapDense | np.ndarray:
    """S = (L + A L A) / 2 with A = diag(1, -1, ..., -1)."""
    M = _as_matrix(L)
    a = -np.ones(M.shape[0])
    a[0] = 1.0
    S = 0.5 * (M + a[:, None] * M * a[None, :])
    S[0, 1:] = 0.0
    S[1:, 0] = 0.0
    if isinstance(L, LinearMapDense):
        return LinearMapDense(S, L.domain, L.codomain)
    return S


# ---------------------------------------------------------------------------
# tensor powers and certificates


def apply_tensor_power(P, t, k: int) -> np.ndarray:
    """P^{(x)k} applied to a dense k-fold tensor t."""
    M = _as_matrix(P)
    t = np.asarray(t, dtype=float)
    if t.ndim != k or any(s != M.shape[1] for s in t.shape):
        raise ValueError(f"tensor of shape {t.shape} is not in the {k}-fold domain")
    for axis in range(k):
        t = np.moveaxis(np.tensordot(M, t, axes=([1], [axis])), 0, axis)
    return t


def tensor_pairing(P, k: int, x, w) -> float:
    """<w, P^{(x)k} x>."""
    y = apply_tensor_power(P, x, k)
    w = np.asarray(w, dtype=float)
    if w.shape != y.shape:
        raise ValueError(f"w has shape {w.shape}, expected {y.shape}")
    return float(np.sum(w * y))


def sample_extreme_rays(C: ConeHandle, rng: np.random.Generator, m: int) -> np.ndarray:
    """m random extreme rays of C, shape (m, ambient_dim)."""
    dim = C.ambient_dim
    out = np.zeros((m, dim))
    if C.kind == "lorentz":
        u = rng.standard_normal((m, C.param))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        out[:, 0] = 1.0
        out[:, 1:] = u
    elif C.kind == "psd":
        d = C.param
        v = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        out[:] = jordan.coords_from_matrices(np.einsum("ma,mb->mab", v, v.conj()))
    elif C.kind == "ell1":
        out[:, 0] = 1.0
        idx = rng.integers(0, C.param, size=m)
        out[np.arange(m), 1 + idx] = rng.choice([-1.0, 1.0], size=m)
    elif C.kind == "ellinf":
        out[:, 0] = 1.0
        out[:, 1:] = rng.choice([-1.0, 1.0], size=(m, C.param))
    else:
        out[np.arange(m), rng.integers(0, dim, size=m)] = 1.0
    return out


def _all_extreme_rays(C: ConeHandle, cap: int):
    """All extreme rays of a polyhedral cone, or None if not polyhedral / too many."""
    n = C.param
    if C.kind == "simplex":
        return np.eye(n)
    if C.kind == "ell1":
        rays = np.zeros((2 * n, n + 1))
        rays[:, 0] = 1.0
        rays[np.arange(n), 1 + np.arange(n)] = 1.0
        rays[n + np.arange(n), 1 + np.arange(n)] = -1.0
        return rays
    if C.kind == "ellinf" and 2 ** n <= cap:
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=n))).reshape(-1, n)
        return np.hstack([np.ones((len(signs), 1)), signs])
    return None


def _max_claim(C: ConeHandle, t: np.ndarray, k: int, tol: float, rng, samples: int) -> dict:
    """Check t in C^{(x)max k} by pairing with products of dual extreme rays."""
    scale = max(np.linalg.norm(t), np.finfo(float).tiny)
    if k == 1:
        ok = in_cone(C, t, tol)
        return {"status": "verified" if ok else "violated", "method": "exact"}
    dual = C.dual()
    rays = _all_extreme_rays(dual, cap=4096)
    if rays is not None and len(rays) ** k <= 10 ** 6:
        worst = np.inf
        for combo in itertools.product(range(len(rays)), repeat=k):
            v = t
            for r in combo:
                v = np.tensordot(rays[r], v, axes=([0], [0]))
            worst = min(worst, float(v))
        status = "verified" if worst >= -tol * scale else "violated"
        return {"status": status, "method": "enumeration", "min_pairing": worst}
    worst = np.inf
    for _ in range(samples):
        v = t
        for _ in range(k):
            v = np.tensordot(sample_extreme_rays(dual, rng, 1)[0], v, axes=([0], [0]))
        worst = min(worst, float(v))
    status = "sampled_no_violation" if worst >= -tol * scale else "violated"
    return {"status": status, "method": "sampling", "samples": samples, "min_pairing": worst}


def _product_rays(rays: np.ndarray, k: int) -> np.ndarray:
    """All k-fold tensor products of the given rays, flattened, shape (len(rays)^k, dim^k)."""
    out = rays
    for _ in range(k - 1):
        out = np.einsum("ai,bj->abij", out, rays).reshape(out.shape[0] * rays.shape[0], -1)
    return out


def _polyhedral_rays(C: ConeHandle, k: int, limit: int = 10 ** 5) -> np.ndarray:
    rays = _all_extreme_rays(C, cap=4096)
    if rays is None:
        raise ValueError(f"{C.kind} cone is not polyhedral or has too many rays")
    if len(rays) ** k > limit:
        raise ValueError(f"{len(rays)}^{k} ray products exceed the budget {limit}")
    return rays


def polyhedral_max_membership(t, C: ConeHandle, k: int, tol: float = DEFAULT_TOL) -> dict:
    """Exact test of t in C^{(x)max k} for a polyhedral cone C.

    t is in the max cone iff it pairs nonnegatively with every product of
    extreme rays of the dual cone.
    """
    t = np.asarray(t, dtype=float)
    rays = _polyhedral_rays(C.dual(), k)
    vals = _product_rays(rays, k) @ t.reshape(-1)
    j = int(np.argmin(vals))
    scale = max(np.linalg.norm(t), np.finfo(float).tiny)
    member = bool(vals[j] >= -tol * scale)
    idx = np.unravel_index(j, (len(rays),) * k)
    return {"member": member, "min_pairing": float(vals[j]),
            "violating_rays": None if member else [rays[i].tolist() for i in idx]}


def polyhedral_min_membership(t, C: ConeHandle, k: int, tol: float = DEFAULT_TOL,
                              reconstruction: float = 1e-10) -> dict:
    """Exact test of t in C^{(x)min k} for a polyhedral cone C by linear programming.

    On success the result carries a ``membership_min`` certificate listing the
    nonnegative combination of ray products. Otherwise a separating tensor w in
    (C*)^{(x)max k} with <w, t> < 0 is returned.
    """
    t = np.asarray(t, dtype=float)
    dim = C.ambient_dim
    rays = _polyhedral_rays(C, k)
    atoms = _product_rays(rays, k)
    flat = t.reshape(-1)
    scale = max(np.linalg.norm(flat), np.finfo(float).tiny)
    res = linprog(np.ones(len(atoms)), A_eq=atoms.T, b_eq=flat, bounds=(0, None), method="highs")
    if res.status == 0:
        lam = res.x
        terms = []
        for j in np.nonzero(lam > 0)[0]:
            idx = np.unravel_index(j, (len(rays),) * k)
            factors = [rays[i] for i in idx]
            factors[0] = lam[j] * factors[0]
            terms.append([f.tolist() for f in factors])
        cert = Certificate("membership_min", {
            "cones": [C.to_json()] * k,
            "terms": terms,
            "tensors": {"target": t.tolist()},
            "tolerances": {"tol": tol, "reconstruction": reconstruction},
            "seed": None,
        })
        if verify_certificate(cert):
            return {"member": True, "certificate": cert, "separator": None}
    # Separation: minimize <w, t> over w with <w, atom> >= 0 and |w| <= 1.
    sep = linprog(flat, A_ub=-atoms, b_ub=np.zeros(len(atoms)), bounds=(-1, 1), method="highs")
    w = sep.x.reshape((dim,) * k)
    value = float(sep.fun)
    member = value >= -tol * scale
    return {"member": bool(member), "certificate": None,
            "separator": None if member else w, "separation_value": value}


def sample_max_tensor(C: ConeHandle, k: int, rng: np.random.Generator, boundary: bool = True) -> np.ndarray:
    """Random element of C^{(x)max k} for polyhedral C whose dual rays have first coordinate 1.

    A Gaussian tensor is shifted along e0^{(x)k} until its smallest pairing with
    the dual ray products is zero (boundary) or a random positive amount.
    """
    dim = C.ambient_dim
    rays = _polyhedral_rays(C.dual(), k)
    if not np.allclose(rays[:, 0], 1.0):
        raise ValueError("dual rays must be normalized to first coordinate 1")
    t = rng.standard_normal((dim,) * k)
    shift = -float((_product_rays(rays, k) @ t.reshape(-1)).min())
    if not boundary:
        shift += rng.exponential()
    t[(0,) * k] += shift
    return t


def sample_min_tensor(C: ConeHandle, k: int, rng: np.random.Generator, terms: int = 4) -> np.ndarray:
    """Random sum of products of cone elements."""
    dim = C.ambient_dim
    out = np.zeros((dim,) * k)
    for _ in range(terms):
        prod = np.ones(())
        for _ in range(k):
            prod = np.multiply.outer(prod, sample_extreme_rays(C, rng, 1)[0] * rng.exponential())
        out += prod
    return out


@dataclass
class Certificate:
    """Machine-checkable evidence; ``payload`` is plain JSON-compatible data."""

    kind: str
    payload: dict = field(default_factory=dict)

    KINDS = ("not_annihilating", "membership_min", "membership_max_violation", "eb_violation")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.payload}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        obj = dict(obj)
        kind = obj.pop("kind")
        return cls(kind, obj)

    def verify(self) -> bool:
        return verify_certificate(self)


def certify_not_annihilating(
    P: LinearMapDense,
    k: int,
    x,
    w,
    tol: float = DEFAULT_TOL,
    seed: int | None = None,
    samples: int = 2000,
) -> Certificate | None:
    """Certificate that P^{(x)k} does not map x into the min cone.

    Returns ``None`` when the pairing ``<w, P^{(x)k} x>`` is not below ``-tol``.
    Membership of x in C1^{(x)max k} and of w in (C2*)^{(x)max k} is checked
    exactly when k = 1 or the dual cone is polyhedral and small, by sampling
    otherwise; the outcome of each check is recorded in ``claims``.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    v = tensor_pairing(P, k, x, w)
    if not v < -tol:
        return None
    rng = np.random.default_rng(seed)
    claims = {
        "x_in_max": _max_claim(P.domain, x, k, tol, rng, samples),
        "w_in_dual_max": _max_claim(P.codomain.dual(), w, k, tol, rng, samples),
    }
    if "violated" in (claims["x_in_max"]["status"], claims["w_in_dual_max"]["status"]):
        raise ValueError(f"input tensors fail their cone claims: {claims}")
    payload = {
        "k": int(k),
        "map": P.to_json(),
        "tensors": {"x": x.tolist(), "w": w.tolist()},
        "pairing_value": v,
        "tolerances": {"tol": tol},
        "seed": seed,
        "claims": claims,
    }
    return Certificate("not_annihilating", payload)


def _verify_not_annihilating(p: dict) -> bool:
    P = LinearMapDense.from_json(p["map"])
    k = int(p["k"])
    x = np.array(p["tensors"]["x"], dtype=float)
    w = np.array(p["tensors"]["w"], dtype=float)
    tol = float(p["tolerances"]["tol"])
    v = tensor_pairing(P, k, x, w)
    if abs(v - p["pairing_value"]) > 1e-9 * max(1.0, abs(v)):
        return False
    if k == 1 and not (in_cone(P.domain, x, tol) and in_cone(P.codomain.dual(), w, tol)):
        return False
    return v < -tol


def _verify_max_violation(p: dict) -> bool:
    tol = float(p["tolerances"]["tol"])
    if p["test"] == "sign_vector":
        C = ConeHandle.from_json(p["cone"])
        xs = np.array(p["tensors"]["xs"], dtype=float)
        s = np.array(p["violating_sign"], dtype=float)
        v = xs[0] + s @ xs[1:]
        return not in_cone(C, v, tol)
    if p["test"] == "product_vector":
        M = np.array(p["tensors"]["M_re"]) + 1j * np.array(p["tensors"]["M_im"])
        y = np.array(p["tensors"]["y_re"]) + 1j * np.array(p["tensors"]["y_im"])
        z = np.array(p["tensors"]["z_re"]) + 1j * np.array(p["tensors"]["z_im"])
        yz = np.kron(y / np.linalg.norm(y), z / np.linalg.norm(z))
        val = float(np.real(yz.conj() @ M @ yz))
        return val < -tol
    return False


def _verify_membership_min(p: dict) -> bool:
    tol = float(p["tolerances"]["tol"])
    cones = [ConeHandle.from_json(c) for c in p["cones"]]
    target = np.array(p["tensors"]["target"], dtype=float)
    total = np.zeros_like(target)
    for term in p["terms"]:
        factors = [np.asarray(f, dtype=float) for f in term]
        for C, f in zip(cones, factors):
            if not in_cone(C, f, tol):
                return False
        prod = factors[0]
        for f in factors[1:]:
            prod = np.multiply.outer(prod, f)
        total = total + prod
    scale = max(1.0, np.linalg.norm(target))
    return float(np.linalg.norm(total - target)) <= float(p["tolerances"]["reconstruction"]) * scale


def _verify_eb_violation(p: dict) -> bool:
    from .psdmaps import choi_matrix, partial_transpose

    tol = float(p["tolerances"]["tol"])
    d_in, d_out = int(p["d_in"]), int(p["d_out"])
    M = np.array(p["composite_matrix"], dtype=float)
    C = choi_matrix(M, d_in, d_out)
    if p["failed_test"] == "choi_psd":
        val = float(np.linalg.eigvalsh(C).min())
    else:
        val = float(np.linalg.eigvalsh(partial_transpose(C, d_in, d_out)).min())
    return val < -tol and abs(val - p["min_eigenvalue"]) <= 1e-8 * max(1.0, abs(val))


def verify_certificate(cert: Certificate) -> bool:
    """Recompute the certified inequality or decomposition from the payload."""
    check = {
        "not_annihilating": _verify_not_annihilating,
        "membership_max_violation": _verify_max_violation,
        "membership_min": _verify_membership_min,
        "eb_violation": _verify_eb_violation,
    }[cert.kind]
    try:
        return bool(check(cert.payload))
    except (KeyError, ValueError, TypeError):
        return False
