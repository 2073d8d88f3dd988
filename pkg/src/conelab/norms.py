"""Tensor and operator norms on l1 / l2 / linf spaces and related cone tests.

Conventions. A k-tensor over R^n is a dense array of shape (n,)*k. A matrix
``P`` of shape (m, n) is an operator from X = R^n to Y = R^m. Results that
are not exact carry ``exact=False`` together with a ``lower`` and an
``upper`` bound; ``value`` is the attained objective of a feasible point
(a product functional for injective norms, a decomposition for projective
and nuclear norms).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

ENUM_BUDGET = 2 ** 22
_KINDS = ("l1", "l2", "linf")
_DUAL = {"l1": "linf", "l2": "l2", "linf": "l1"}


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown space {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension must be positive")

    def dual(self) -> "SpaceDescriptor":
        return SpaceDescriptor(_DUAL[self.kind], self.n)

    @property
    def order(self):
        return {"l1": 1, "l2": 2, "linf": np.inf}[self.kind]


def l1(n: int) -> SpaceDescriptor:
    return SpaceDescriptor("l1", n)


def l2(n: int) -> SpaceDescriptor:
    return SpaceDescriptor("l2", n)


def linf(n: int) -> SpaceDescriptor:
    return SpaceDescriptor("linf", n)


def vnorm(x, X: SpaceDescriptor, axis=-1):
    return np.linalg.norm(np.asarray(x, dtype=float), X.order, axis=axis)


def sign_vectors(n: int) -> np.ndarray:
    if 2 ** n > ENUM_BUDGET:
        raise ValueError(f"2^{n} sign vectors exceed the enumeration budget")
    return np.array(list(itertools.product((1.0, -1.0), repeat=n))).reshape(-1, n)


def _result(value, exact, lower=None, upper=None) -> dict:
    value = float(value)
    return {
        "value": value,
        "exact": bool(exact),
        "lower": float(value if lower is None else lower),
        "upper": float(value if upper is None else upper),
    }


def _check_tensor(z, X: SpaceDescriptor, k):
    z = np.asarray(z, dtype=float)
    if k is None:
        k = z.ndim
    if z.ndim != k or any(s != X.n for s in z.shape):
        raise ValueError(f"tensor of shape {z.shape} is not in ({X.kind}^{X.n})^(x){k}")
    return z, k


def _matricizations(z: np.ndarray):
    k = z.ndim
    for axis in range(k):
        yield np.moveaxis(z, axis, 0).reshape(z.shape[axis], -1)


def _kron_all(vectors) -> np.ndarray:
    out = np.ones(())
    for v in vectors:
        out = np.multiply.outer(out, v)
    return out.reshape(-1)


def _hopm(z: np.ndarray, rng: np.random.Generator, starts: int, iters: int):
    """Multi-start alternating maximization of |<z, u_1 (x) ... (x) u_k>| over unit u_i."""
    k, n = z.ndim, z.shape[0]
    mats = list(_matricizations(z))
    best, best_us = -1.0, None
    for s in range(starts):
        if s == 0:
            u0 = np.linalg.svd(mats[0], full_matrices=False)[0][:, 0]
            us = [u0] + [np.ones(n) / np.sqrt(n) for _ in range(k - 1)]
        else:
            us = [rng.standard_normal(n) for _ in range(k)]
            us = [u / np.linalg.norm(u) for u in us]
        val = 0.0
        for _ in range(iters):
            for i in range(k):
                t = mats[i] @ _kron_all(us[:i] + us[i + 1:])
                nrm = np.linalg.norm(t)
                if nrm == 0:
                    break
                us[i] = t / nrm
            new = abs(float(mats[0][:, :] @ _kron_all(us[1:]) @ us[0]))
            if new <= val * (1 + 1e-14):
                val = max(val, new)
                break
            val = new
        if val > best:
            best, best_us = val, [u.copy() for u in us]
    return best, best_us


def _contract_all(z: np.ndarray, us) -> float:
    t = z
    for u in reversed(us):
        t = np.tensordot(t, u, axes=([t.ndim - 1], [0]))
    return float(t)


def injective_norm(z, X: SpaceDescriptor, k: int | None = None, rng=None,
                   starts: int = 20, iters: int = 500) -> dict:
    """sup |<l_1 (x) ... (x) l_k, z>| over unit functionals of X*."""
    z, k = _check_tensor(z, X, k)
    if k == 1:
        return _result(vnorm(z, X), True)
    if X.kind == "linf":
        return _result(np.abs(z).max(), True)
    if X.kind == "l1":
        n = X.n
        if 2 ** (n * (k - 1)) > ENUM_BUDGET:
            raise ValueError("sign enumeration exceeds the budget")
        S = sign_vectors(n)
        t = z.reshape(1, *z.shape)
        for _ in range(k - 1):
            t = np.tensordot(S, t, axes=([1], [1]))  # new leading axis of signs
            t = t.reshape(-1, *t.shape[2:])
        return _result(np.abs(t).sum(axis=-1).max(), True)
    if k == 2:
        return _result(np.linalg.norm(z, 2), True)
    rng = np.random.default_rng(0) if rng is None else rng
    lower, _ = _hopm(z, rng, starts, iters)
    upper = min(np.linalg.norm(m, 2) for m in _matricizations(z))
    return _result(lower, False, lower, max(lower, upper))


def _slice_trace_bound(z: np.ndarray) -> float:
    """sum over the first k-2 indices of the trace norms of the last-two-axis slices."""
    n = z.shape[-1]
    slices = z.reshape(-1, n, n)
    return float(sum(np.linalg.svd(s, compute_uv=False).sum() for s in slices))


def _lp_min_l1(atoms: np.ndarray, target: np.ndarray):
    """min ||c||_1 subject to atoms^T c = target; atoms has one atom per row."""
    K = atoms.shape[0]
    A = np.hstack([atoms.T, -atoms.T])
    res = linprog(np.ones(2 * K), A_eq=A, b_eq=target, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    c = res.x[:K] - res.x[K:]
    dual = res.eqlin.marginals
    return c, dual


def _product_atoms(vectors: np.ndarray, k: int) -> np.ndarray:
    atoms = vectors
    for _ in range(k - 1):
        atoms = np.einsum("ai,bj->abij", atoms, vectors).reshape(-1, atoms.shape[1] * vectors.shape[1])
    return atoms


def projective_norm(z, X: SpaceDescriptor, k: int | None = None, rng=None,
                    peel_steps: int = 30) -> dict:
    """inf sum_i ||x_i^1|| ... ||x_i^k|| over decompositions of z."""
    z, k = _check_tensor(z, X, k)
    if k == 1:
        return _result(vnorm(z, X), True)
    if X.kind == "l1":
        return _result(np.abs(z).sum(), True)
    if X.kind == "l2" and k == 2:
        return _result(np.linalg.svd(z, compute_uv=False).sum(), True)
    if X.kind == "linf":
        n = X.n
        if 2 ** (n * k) > 2 ** 16:
            raise ValueError("LP over sign-vector products exceeds the budget")
        atoms = _product_atoms(sign_vectors(n)[: 2 ** (n - 1)], k)
        target = z.reshape(-1)
        c, dual = _lp_min_l1(atoms, target)
        upper = np.abs(c).sum() + np.abs(target - atoms.T @ c).sum()
        scale = np.abs(atoms @ dual).max()
        lower = float(dual @ target / scale) if scale > 0 else 0.0
        exact = upper - lower <= 1e-9 * max(1.0, upper)
        return _result(upper, exact, min(lower, upper), upper)
    # l2, k >= 3
    rng = np.random.default_rng(0) if rng is None else rng
    lower = max(np.linalg.svd(m, compute_uv=False).sum() for m in _matricizations(z))
    eps_up = injective_norm(z, X, k, rng=rng)["upper"]
    if eps_up > 0:
        lower = max(lower, float(np.sum(z * z)) / eps_up)
    upper = _slice_trace_bound(z)
    r = z.copy()
    peeled = 0.0
    for _ in range(peel_steps):
        if np.linalg.norm(r) <= 1e-14 * max(1.0, np.linalg.norm(z)):
            break
        sigma, us = _hopm(r, rng, starts=3, iters=200)
        rank1 = us[0]
        for u in us[1:]:
            rank1 = np.multiply.outer(rank1, u)
        s = float(np.sum(r * rank1))
        r = r - s * rank1
        peeled += abs(s)
        upper = min(upper, peeled + _slice_trace_bound(r))
    lower = min(lower, upper)
    return _result(upper, upper - lower <= 1e-12 * max(1.0, upper), lower, upper)


# ---------------------------------------------------------------------------
# operator and nuclear norms


def _check_op(P, X, Y):
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (Y.n, X.n):
        raise ValueError(f"matrix shape {P.shape} does not map {X.kind}^{X.n} to {Y.kind}^{Y.n}")
    return P


def operator_norm(P, X: SpaceDescriptor, Y: SpaceDescriptor) -> float:
    """sup ||P x||_Y over the unit ball of X; exact for every l1/l2/linf pair."""
    P = _check_op(P, X, Y)
    if X.kind == "l1":
        return float(vnorm(P, Y, axis=0).max())
    if Y.kind == "linf":
        return float(vnorm(P, X.dual(), axis=1).max())
    if X.kind == "l2" and Y.kind == "l2":
        return float(np.linalg.norm(P, 2))
    if X.kind == "linf":
        return float(vnorm(sign_vectors(X.n) @ P.T, Y, axis=1).max())
    # Y = l1: ||P||_{X->l1} = ||P^T||_{linf->X*}
    return float(vnorm(sign_vectors(Y.n) @ P, X.dual(), axis=1).max())


def _nuclear_l1_to_l2(P: np.ndarray) -> dict:
    """Nuclear norm of P : l1^n -> l2^m as a second-order cone program."""
    import cvxpy as cp

    m, n = P.shape
    S = sign_vectors(n)[: 2 ** (n - 1)]
    Yv = cp.Variable((m, S.shape[0]))
    cons = [Yv @ S == P]
    prob = cp.Problem(cp.Minimize(cp.sum(cp.norm(Yv, 2, axis=0))), cons)
    prob.solve()
    Ysol = np.asarray(Yv.value)
    R = P - Ysol @ S
    # residual absorbed by the column decomposition P = sum_j (P e_j) e_j^*
    upper = float(np.linalg.norm(Ysol, axis=0).sum() + np.linalg.norm(R, axis=0).sum())
    Q = -np.asarray(cons[0].dual_value)  # (m, n), pairing <P, Q>
    qn = operator_norm(Q.T, l2(m), l1(n))
    lower = float(np.sum(P * Q) / qn) if qn > 0 else 0.0
    lower = min(lower, upper)
    return _result(upper, upper - lower <= 1e-7 * max(1.0, upper), lower, upper)


def nuclear_norm(P, X: SpaceDescriptor, Y: SpaceDescriptor) -> dict:
    """inf sum ||y_i||_Y ||x_i^*||_{X*} over rank-one expansions of P.

    Exact formulas: l2 -> l2 trace norm; linf -> Y sum of column norms in Y;
    X -> l1 sum of row norms in X*. l1 -> linf is an LP over products of sign
    vectors. l1 -> l2 and l2 -> linf (by transposition) are second-order cone
    programs; their bounds are certified by a repaired primal decomposition
    and by a dual operator whose norm is computed exactly.
    """
    P = _check_op(P, X, Y)
    if not np.any(P):
        return _result(0.0, True)
    if X.kind == "l2" and Y.kind == "l2":
        return _result(np.linalg.svd(P, compute_uv=False).sum(), True)
    if X.kind == "linf":
        return _result(vnorm(P, Y, axis=0).sum(), True)
    if Y.kind == "l1":
        return _result(vnorm(P, X.dual(), axis=1).sum(), True)
    if X.kind == "l1" and Y.kind == "linf":
        m, n = P.shape
        if 2 ** (m + n) > 2 ** 16:
            raise ValueError("LP over sign-vector products exceeds the budget")
        T = sign_vectors(m)[: 2 ** (m - 1)]
        S = sign_vectors(n)
        atoms = np.einsum("ai,bj->abij", T, S).reshape(-1, m * n)
        target = P.reshape(-1)
        c, dual = _lp_min_l1(atoms, target)
        # the LP residual is absorbed by P = sum_i e_i (x) row_i
        resid = (target - atoms.T @ c).reshape(m, n)
        upper = float(np.abs(c).sum() + np.abs(resid).max(axis=1).sum())
        scale = np.abs(atoms @ dual).max()
        lower = float(dual @ target / scale) if scale > 0 else 0.0
        lower = min(lower, upper)
        return _result(upper, upper - lower <= 1e-9 * max(1.0, upper), lower, upper)
    if X.kind == "l1" and Y.kind == "l2":
        return _nuclear_l1_to_l2(P)
    # l2 -> linf: transpose to linf* = l1 -> l2* = l2
    return _nuclear_l1_to_l2(P.T)


# ---------------------------------------------------------------------------
# tau_k bounds


@dataclass
class TauBound:
    k: int
    lower: float
    upper: float
    witnesses: list = field(default_factory=list)
    reference: float | None = None


def _l2_eps_upper(z) -> float:
    return min(np.linalg.norm(m, 2) for m in _matricizations(z))


def _eps_upper(z, X):
    # over l2 with k >= 3 only the matricization bound is needed, skip the search
    if X.kind == "l2" and np.ndim(z) >= 3:
        return _l2_eps_upper(z)
    return injective_norm(z, X)["upper"]


def _pi_lower(z, Y):
    if Y.kind == "l2" and np.ndim(z) >= 3:
        lower = max(np.linalg.svd(m, compute_uv=False).sum() for m in _matricizations(z))
        eps = _l2_eps_upper(z)
        return max(lower, float(np.sum(z * z)) / eps) if eps > 0 else lower
    return projective_norm(z, Y)["lower"]


def tau_bounds(T, X: SpaceDescriptor, Y: SpaceDescriptor, k: int, rng=None,
               random_candidates: int = 3) -> TauBound:
    """Bracket tau_k(T) = ||T^{(x)k}||_{eps_k(X) -> pi_k(Y)}^{1/k}.

    Lower bounds come from explicit tensors z via
    ||T^{(x)k} z||_pi (lower bound) / ||z||_eps (upper bound), together with
    tau_1 = ||T||. For the Hurwitz witness over l2 the injective bound 1 holds
    by construction. The upper bound is the nuclear norm for every k (at k = 1
    the lower bound ||T|| is already the exact value).
    """
    from . import cones, hurwitz

    T = _check_op(T, X, Y)
    rng = np.random.default_rng(0) if rng is None else rng
    op = operator_norm(T, X, Y)
    nuc = nuclear_norm(T, X, Y)
    upper = nuc["upper"]
    witnesses = [{"name": "operator_norm", "ratio": op}]
    lower = op
    if k >= 2:
        n = X.n
        cands = []
        try:
            w = hurwitz.witness_tensor(n, k)
            cands.append(("hurwitz", w.coords, 1.0 if X.kind == "l2" else None))
        except ValueError:
            pass
        diag = np.zeros((n,) * k)
        diag[(np.arange(n),) * k] = 1.0
        cands.append(("diagonal", diag, None))
        for r in range(random_candidates):
            cands.append((f"random_sign_{r}", rng.choice([-1.0, 1.0], size=(n,) * k), None))
        for name, z, eps_cert in cands:
            try:
                eps = _eps_upper(z, X)
                if eps_cert is not None:
                    eps = min(eps, eps_cert)
                y = cones.apply_tensor_power(T, z, k)
                pi = _pi_lower(y, Y)
                if X.kind == "l2" and Y.kind == "l2" and eps_cert is not None:
                    pi = max(pi, float(np.sum(y * z)) / eps_cert)
            except ValueError:
                continue
            if eps <= 0:
                continue
            ratio = (pi / eps) ** (1.0 / k)
            witnesses.append({"name": name, "ratio": ratio})
            lower = max(lower, ratio)
    reference = None
    if X == Y and np.allclose(T, np.eye(X.n)) and X.kind == "l1":
        reference = float(np.sqrt(X.n))
    return TauBound(k, float(min(lower, upper)), float(upper), witnesses, reference)


# ---------------------------------------------------------------------------
# projection onto R e0^{(x)k} (+) X^{(x)k}


def project_Xk(z) -> np.ndarray:
    """Keep the e0^{(x)k} coefficient and the pure X block, zero every mixed entry."""
    z = np.asarray(z, dtype=float)
    k = z.ndim
    out = np.zeros_like(z)
    out[(slice(1, None),) * k] = z[(slice(1, None),) * k]
    out[(0,) * k] = z[(0,) * k]
    return out


def project_Xk_product(z) -> np.ndarray:
    """Same projection as the product of S_ij = (id (x) id + A (x) A)/2 over pairs i < j."""
    z = np.asarray(z, dtype=float)
    k = z.ndim
    a = -np.ones(z.shape[0])
    a[0] = 1.0
    out = z
    for i in range(k):
        for j in range(i + 1, k):
            shape_i = [1] * k
            shape_j = [1] * k
            shape_i[i] = shape_j[j] = z.shape[0]
            flipped = out * a.reshape(shape_i) * a.reshape(shape_j)
            out = 0.5 * (out + flipped)
    if k == 1:
        return out.copy()
    return out


def projection_matrix(dim: int, k: int) -> np.ndarray:
    """Matrix of project_Xk on (R^dim)^{(x)k}."""
    D = dim ** k
    eye = np.eye(D).reshape((D,) + (dim,) * k)
    return np.array([project_Xk(e).reshape(-1) for e in eye]).T


# ---------------------------------------------------------------------------
# the two-qubit hat / check example

_PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _as_4x4(Z) -> np.ndarray:
    Z = np.asarray(Z)
    if Z.shape == (16,):
        from .jordan import matrices_from_coords

        Z = matrices_from_coords(Z.real, 4)
    if Z.shape != (4, 4):
        raise ValueError("Z must be a 4x4 Hermitian matrix or 16 coordinates")
    if np.abs(Z - Z.conj().T).max() > 1e-10 * max(1.0, np.abs(Z).max()):
        raise ValueError("Z is not Hermitian")
    return Z.astype(complex)


def pauli_moments(Z) -> np.ndarray:
    """M_ij = Tr[Z (sigma_i (x) sigma_j)], i, j = 0..3."""
    Z = _as_4x4(Z)
    ops = np.einsum("iab,jcd->ijacbd", _PAULI, _PAULI).reshape(4, 4, 4, 4)
    return np.einsum("ijab,ba->ij", ops, Z).real


def _from_moments(M: np.ndarray) -> np.ndarray:
    return np.einsum("ij,iab,jcd->acbd", M, _PAULI, _PAULI).reshape(4, 4) / 4


def qubit_block_positivity(M: np.ndarray, rng=None, starts: int = 200, iters: int = 100) -> dict:
    """Minimize (1, u)^T M (1, v) over unit u, v in R^3 by alternating exact steps.

    A negative minimum comes with the product state achieving it.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    best, best_uv = np.inf, None
    for _ in range(starts):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        val = np.inf
        for _ in range(iters):
            row = np.concatenate([[1.0], u]) @ M
            v = -row[1:] / max(np.linalg.norm(row[1:]), 1e-300)
            col = M @ np.concatenate([[1.0], v])
            u = -col[1:] / max(np.linalg.norm(col[1:]), 1e-300)
            new = float(np.concatenate([[1.0], u]) @ M @ np.concatenate([[1.0], v]))
            if new >= val - 1e-15:
                val = min(val, new)
                break
            val = new
        if val < best:
            best, best_uv = val, (u, v)
    return {"minimum": best, "u": best_uv[0].tolist(), "v": best_uv[1].tolist()}


def hat_check_membership_qubit(Z, tol: float = 1e-8, rng=None, search_hat: bool = True) -> dict:
    """Membership of a two-qubit operator in the check cone and evidence for the hat cone.

    Check: Z is block positive and Tr Z >= ||M_3||_1 with M_3 the 3x3 block of
    Pauli moments. Hat: an explicit Z = S + W with S separable (PSD with PSD
    partial transpose, which characterises separability for two qubits) and W
    with vanishing mixed moments and Tr W >= ||M_3(W)||_inf; when no such
    decomposition is found the answer is "unknown".
    """
    Z = _as_4x4(Z)
    M = pauli_moments(Z)
    scale = max(1.0, np.abs(M).max())
    bp = qubit_block_positivity(M, rng=rng)
    block = M[1:, 1:]
    trace_norm = float(np.linalg.svd(block, compute_uv=False).sum())
    in_max = bp["minimum"] >= -tol * scale
    in_check = bool(in_max and M[0, 0] >= trace_norm - tol * scale)
    out = {
        "in_check": in_check,
        "max_minimum": bp["minimum"],
        "trace": float(M[0, 0]),
        "moment_block_trace_norm": trace_norm,
        "moments": M.tolist(),
        "in_hat_evidence": None,
    }
    if search_hat:
        out["in_hat_evidence"] = _hat_decomposition(Z, tol)
    return out


def _partial_transpose_4(X):
    return X.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def _hat_decomposition(Z: np.ndarray, tol: float):
    import cvxpy as cp

    S = cp.Variable((4, 4), hermitian=True)
    s = cp.Variable()
    W = Z - S
    ops = np.einsum("iab,jcd->ijacbd", _PAULI, _PAULI).reshape(4, 4, 4, 4)
    mom = [[cp.real(cp.trace(ops[i, j] @ W)) for j in range(4)] for i in range(4)]
    block = cp.bmat([[mom[i][j] for j in range(1, 4)] for i in range(1, 4)])
    ST = cp.bmat([[S[2 * a + d, 2 * c + b] for c in range(2) for d in range(2)]
                  for a in range(2) for b in range(2)])
    cons = [S - s * np.eye(4) >> 0, ST - s * np.eye(4) >> 0,
            mom[0][0] - cp.sigma_max(block) >= s, s <= 1.0]
    cons += [mom[0][j] == 0 for j in range(1, 4)] + [mom[i][0] == 0 for i in range(1, 4)]
    prob = cp.Problem(cp.Maximize(s), cons)
    try:
        prob.solve()
    except cp.error.SolverError:
        return None
    if S.value is None:
        return None
    Sv = np.asarray(S.value)
    Sv = (Sv + Sv.conj().T) / 2
    # zero the solver's residual mixed moments of W exactly, moving them into S
    MW = pauli_moments(Z - Sv)
    MW[0, 1:] = 0.0
    MW[1:, 0] = 0.0
    Wv = _from_moments(MW)
    Sv = Z - Wv
    MW = pauli_moments(Wv)
    scale = max(1.0, np.abs(Z).max())
    checks = {
        "S_min_eig": float(np.linalg.eigvalsh(Sv).min()),
        "S_pt_min_eig": float(np.linalg.eigvalsh(_partial_transpose_4(Sv)).min()),
        "W_mixed_moments": float(max(np.abs(MW[0, 1:]).max(), np.abs(MW[1:, 0]).max())),
        "W_margin": float(MW[0, 0] - np.linalg.norm(MW[1:, 1:], 2)),
    }
    ok = (checks["S_min_eig"] >= -tol * scale and checks["S_pt_min_eig"] >= -tol * scale
          and checks["W_mixed_moments"] <= tol * scale and checks["W_margin"] >= -tol * scale)
    if not ok:
        return None
    return {"S": {"re": Sv.real.tolist(), "im": Sv.imag.tolist()},
            "W": {"re": Wv.real.tolist(), "im": Wv.imag.tolist()},
            "margin": float(s.value), "checks": checks}


# ---------------------------------------------------------------------------
# empirical check of the transfer inequality


def transfer_check(alpha: float, P, X: SpaceDescriptor, Y: SpaceDescriptor, k: int,
                   samples: int = 200, rng=None) -> dict:
    """Sample z and test ||P^{(x)k} z||_pi <= alpha^k ||z||_eps when tau_k-upper(P) <= alpha.

    A violation is only reported when a rigorous lower bound for the left side
    exceeds a rigorous upper bound for the right side.
    """
    from . import cones, hurwitz

    P = _check_op(P, X, Y)
    rng = np.random.default_rng(0) if rng is None else rng
    tau_up = nuclear_norm(P, X, Y)["upper"]
    applicable = tau_up <= alpha * (1 + 1e-12)
    tensors = [rng.standard_normal((X.n,) * k) for _ in range(samples)]
    if X.kind == "l2":
        try:
            tensors.append(np.array(hurwitz.witness_tensor(X.n, k).coords))
        except ValueError:
            pass
    worst, violations = 0.0, []
    for z in tensors:
        z0 = _eps_upper(z, X)
        if z0 <= 0:
            continue
        lhs = _pi_lower(cones.apply_tensor_power(P, z, k), Y)
        ratio = lhs / (alpha ** k * z0) if alpha > 0 else (np.inf if lhs > 0 else 0.0)
        worst = max(worst, ratio)
        if applicable and ratio > 1 + 1e-9:
            violations.append({"ratio": ratio, "z": z.tolist()})
    return {"applicable": bool(applicable), "tau_upper": tau_up, "max_ratio": worst,
            "samples": len(tensors), "violations": violations}
