"""Sinkhorn-type scaling between symmetric cones and the l1 entanglement-breaking decomposition.

Jordan algebras are identified with their cones through
:func:`conelab.jordan.algebra_of_cone`; elements are coordinate vectors in
the fixed orthonormal bases of :mod:`conelab.jordan`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cones, jordan
from .jordan import (AlgebraDescriptor, JordanElement, eig_coords, function_coords,
                     inverse_coords, quadratic_matrix)
from .linmap import LinearMapDense

DEFAULT_TOL = 1e-9
DAMPING = 0.5
NON_MONOTONE_LIMIT = 1000


class InteriorityError(ValueError):
    """The map does not send the cone into the interior of the target cone."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class ScalingResult:
    A: LinearMapDense
    B: LinearMapDense
    P_tilde: LinearMapDense
    A_generator: JordanElement  # A = Q_{A_generator}
    B_generator: JordanElement  # B = Q_{B_generator}
    iterations: int
    residual_unital: float
    residual_trace: float
    lam: float
    trajectory: list
    adjoint_scale: float  # P^* = adjoint_scale * P^T
    damped: bool = False
    interiority: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(), "B": self.B.to_json(), "P_tilde": self.P_tilde.to_json(),
            "A_generator": self.A_generator.to_json(), "B_generator": self.B_generator.to_json(),
            "iterations": self.iterations, "residual_unital": self.residual_unital,
            "residual_trace": self.residual_trace, "lambda": self.lam,
            "trajectory": self.trajectory, "adjoint_scale": self.adjoint_scale,
            "damped": self.damped, "interiority": self.interiority,
        }


def _interiority(P: np.ndarray, alg1: AlgebraDescriptor, alg2: AlgebraDescriptor, rng,
                 samples: int = 100) -> dict:
    """Smallest eigenvalue of P(c), relative to ||P||, over the Jordan frame of e and sampled extreme rays."""
    _, frame = eig_coords(alg1, alg1.identity.coords)
    rays = cones.sample_extreme_rays(alg1.cone, rng, samples)
    pts = np.vstack([frame, rays])
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    images = pts @ P.T
    mins = [float(eig_coords(alg2, y)[0].min()) for y in images]
    return {"frame_min": min(mins[:len(frame)]), "sampled_min": min(mins[len(frame):]),
            "samples": samples, "relative_to": float(np.linalg.norm(P, 2))}


def sinkhorn_scale(P: LinearMapDense, tol: float = DEFAULT_TOL, max_iter: int = 10_000,
                   rng=None) -> ScalingResult:
    """Find automorphisms A, B with B P A unital and trace preserving.

    Iterates x <- M(x) = inv1(P^*(inv2(P x))) / <e1, .> from x0 = e1/<e1, e1>;
    with y = P(x) the scaling is A = Q_{sqrt x} and B = Q_{(sqrt y)^{-1}}.
    The adjoint is taken after rescaling the target inner product so that
    ||e1|| = ||e2||, i.e. P^* = s P^T with s = ||e1||^2/||e2||^2.
    """
    alg1 = jordan.algebra_of_cone(P.domain)
    alg2 = jordan.algebra_of_cone(P.codomain)
    M = np.asarray(P.matrix, dtype=float)
    rng = np.random.default_rng(0) if rng is None else rng
    e1 = alg1.identity.coords
    e2 = alg2.identity.coords
    s = float(e1 @ e1) / float(e2 @ e2)
    Pstar = s * M.T

    inter = _interiority(M, alg1, alg2, rng)
    margin = 1e-12 * inter["relative_to"]
    if min(inter["frame_min"], inter["sampled_min"]) <= margin:
        raise InteriorityError(f"map is not strictly positive: {inter}")

    def step(x):
        y = M @ x
        if eig_coords(alg2, y)[0].min() <= 0:
            raise InteriorityError("iteration left the interior of the target cone")
        z = inverse_coords(alg1, Pstar @ inverse_coords(alg2, y))
        if eig_coords(alg1, z)[0].min() <= 0:
            raise InteriorityError("iteration left the interior of the source cone")
        return z / float(e1 @ z)

    x = e1 / float(e1 @ e1)
    trajectory = []
    damped = False
    non_monotone = 0
    fp_tol = tol
    it = 0
    while True:
        if it >= max_iter:
            raise ConvergenceError(f"no convergence in {max_iter} iterations", trajectory)
        mx = step(x)
        it += 1
        res = float(np.linalg.norm(mx - x))
        if trajectory and res > trajectory[-1]:
            non_monotone += 1
            if non_monotone >= NON_MONOTONE_LIMIT:
                damped = True
        trajectory.append(res)
        x = (1 - DAMPING) * x + DAMPING * mx if damped else mx
        if res <= fp_tol:
            result = _assemble(P, M, Pstar, x, alg1, alg2, it, trajectory, s, damped, inter)
            if max(result.residual_unital, result.residual_trace) <= tol and abs(result.lam - 1) <= 10 * tol:
                return result
            fp_tol /= 10
            if fp_tol < 1e-16:
                raise ConvergenceError("residuals stall above tolerance", trajectory)


def _assemble(P, M, Pstar, x, alg1, alg2, iterations, trajectory, s, damped, inter) -> ScalingResult:
    y = M @ x
    rx = function_coords(alg1, x, np.sqrt)
    ry_inv = function_coords(alg2, y, lambda lam: 1.0 / np.sqrt(lam))
    QA = quadratic_matrix(alg1, rx)
    QB = quadratic_matrix(alg2, ry_inv)
    Pt = QB @ M @ QA
    e1 = alg1.identity.coords
    e2 = alg2.identity.coords
    lhs = Pstar @ inverse_coords(alg2, y)
    xinv = inverse_coords(alg1, x)
    lam = float(lhs @ xinv / (xinv @ xinv))
    return ScalingResult(
        A=LinearMapDense(QA, P.domain, P.domain),
        B=LinearMapDense(QB, P.codomain, P.codomain),
        P_tilde=LinearMapDense(Pt, P.domain, P.codomain),
        A_generator=JordanElement(alg1, rx),
        B_generator=JordanElement(alg2, ry_inv),
        iterations=iterations,
        residual_unital=float(np.linalg.norm(Pt @ e1 - e2)),
        residual_trace=float(np.linalg.norm(s * Pt.T @ e2 - e1)),
        lam=lam,
        trajectory=trajectory,
        adjoint_scale=s,
        damped=damped,
        interiority=inter,
    )


def random_strictly_positive_map(cone: cones.ConeHandle, rng: np.random.Generator,
                                 delta: float = 0.1, terms: int = 3) -> LinearMapDense:
    """Random map sending the cone into its interior.

    PSD: X -> sum K_i X K_i^dag + delta Tr(X) id. Lorentz: a sum of maps
    Q_a o I_{1,b} o Q_c with |b| < 1 and interior a, c, plus delta e <e, .>.
    """
    alg = jordan.algebra_of_cone(cone)
    if cone.kind == "psd":
        from .psdmaps import random_positive_map

        return random_positive_map(cone.param, rng, kraus=terms, delta=delta).as_linear_map()
    n = cone.param
    e = alg.identity.coords
    M = delta * np.outer(e, e)
    for _ in range(terms):
        a = jordan.random_cone_element(alg, rng).coords + 0.1 * e
        c = jordan.random_cone_element(alg, rng).coords + 0.1 * e
        iso = cones.IsotropicMap(1.0, rng.uniform(-1, 1), n).matrix()
        M = M + quadratic_matrix(alg, a) @ iso @ quadratic_matrix(alg, c)
    return LinearMapDense(M, cone, cone)


# ---------------------------------------------------------------------------
# l1 entanglement-breaking decomposition


@dataclass(frozen=True, eq=False)
class MinDecomposition:
    """Terms (v, c) with v in C_{l1^k} and c in the symmetric cone; sum v (x) c is the target."""

    k: int
    algebra: AlgebraDescriptor
    terms: list
    terms_normalized: list
    target: np.ndarray  # shape (k+1, dim): row 0 = sqrt(k) x0, row i = x_i
    epsilon: float
    slack_min_eigenvalue: float
    residual: float

    @property
    def relative_residual(self) -> float:
        return self.residual / max(1.0, float(np.linalg.norm(self.target)))

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.target)
        for v, c in self.terms:
            out += np.outer(v, c.coords)
        return out

    def certificate(self, tol: float = 1e-9, reconstruction: float = 1e-10) -> cones.Certificate:
        return cones.Certificate("membership_min", {
            "cones": [cones.ell1(self.k).to_json(), self.algebra.cone.to_json()],
            "terms": [[np.asarray(v).tolist(), c.coords.tolist()] for v, c in self.terms],
            "tensors": {"target": self.target.tolist()},
            "tolerances": {"tol": tol, "reconstruction": reconstruction},
            "seed": None,
        })

    def verify(self, tol: float = 1e-9, reconstruction: float = 1e-10) -> dict:
        """Re-check every factor and the reconstruction from scratch."""
        cert = self.certificate(tol, reconstruction)
        return {"valid": cones.verify_certificate(cert), "residual": self.residual,
                "relative_residual": self.relative_residual,
                "slack_min_eigenvalue": self.slack_min_eigenvalue, "epsilon": self.epsilon}

    def to_json(self) -> dict:
        out = self.certificate().to_json()
        out.update(self.verify())
        out["algebra"] = self.algebra.to_json()
        return out


class MaxMembershipError(ValueError):
    def __init__(self, message, violating_sign):
        super().__init__(message)
        self.violating_sign = violating_sign


def ell1_break_decompose(alg: AlgebraDescriptor, xs, tol: float = 1e-9) -> MinDecomposition:
    """Explicit min-cone decomposition of (id (x) I_{sqrt k})(x) for x in C (x)max C_{l1^k}.

    ``xs`` holds the Jordan components (x_0, ..., x_k) as rows. The input is
    normalized to x_0 = e with Q_{(sqrt x0)^{-1}}, decomposed as
    e0 (x) (sqrt(k) e - sum |x_i'|) + sum (e0 + e_i) (x) (x_i')_+ + (e0 - e_i) (x) (x_i')_-,
    and mapped back with Q_{sqrt x0}. A boundary x_0 is replaced once by
    x_0 + 1e-8 ||x_0|| e.
    """
    xs = np.array(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != alg.ambient_dim:
        raise ValueError("xs must have shape (k+1, ambient_dim)")
    k = xs.shape[0] - 1
    if k < 1:
        raise ValueError("k must be at least 1")
    check = cones.max_membership_ell1_factor(alg.cone, xs, tol)
    if not check["member"]:
        raise MaxMembershipError("input is not in the max tensor product", check["violating_sign"])
    e = alg.identity.coords
    x0 = xs[0]
    eps = 0.0
    lam0 = eig_coords(alg, x0)[0]
    if lam0.min() <= 1e-12 * max(np.linalg.norm(x0), 1e-300):
        eps = 1e-8 * max(np.linalg.norm(x0), 1.0)
        x0 = x0 + eps * e
        xs[0] = x0
        if eig_coords(alg, x0)[0].min() <= 0:
            raise ValueError("x0 is not invertible after regularization")
    r = function_coords(alg, x0, np.sqrt)
    r_inv = function_coords(alg, x0, lambda lam: 1.0 / np.sqrt(lam))
    Q = quadratic_matrix(alg, r)
    Qinv = quadratic_matrix(alg, r_inv)
    xn = xs[1:] @ Qinv.T
    pos, neg = [], []
    for v in xn:
        lam, frame = eig_coords(alg, v)
        pos.append(np.maximum(lam, 0.0) @ frame)
        neg.append(np.maximum(-lam, 0.0) @ frame)
    pos, neg = np.array(pos), np.array(neg)
    middle = np.sqrt(k) * e - (pos + neg).sum(axis=0)
    slack_min = float(eig_coords(alg, middle)[0].min())

    # Map back through Q; the negative parts and the middle term are formed in
    # the original frame so that the sum reproduces the target up to rounding.
    pos_b = pos @ Q.T
    neg_b = pos_b - xs[1:]
    middle_b = np.sqrt(k) * x0 - (pos_b + neg_b).sum(axis=0)

    basis = np.eye(k + 1)
    raw = [(basis[0], middle, middle_b)]
    for i in range(k):
        raw.append((basis[0] + basis[i + 1], pos[i], pos_b[i]))
        raw.append((basis[0] - basis[i + 1], neg[i], neg_b[i]))
    scale = max(np.linalg.norm(xs), 1e-300)
    raw = [t for t in raw if np.linalg.norm(t[1]) > 1e-15 * np.sqrt(k + 1)]
    terms_n = [(v, JordanElement(alg, c)) for v, c, _ in raw]
    terms = [(v, JordanElement(alg, c)) for v, _, c in raw]
    target = xs.copy()
    target[0] = np.sqrt(k) * x0
    dec = MinDecomposition(k, alg, terms, terms_n, target, eps, slack_min, 0.0)
    residual = float(np.linalg.norm(dec.reconstruct() - target))
    object.__setattr__(dec, "residual", residual)
    return dec


def sample_max_ell1(alg: AlgebraDescriptor, k: int, rng: np.random.Generator,
                    max_tries: int = 1000) -> np.ndarray:
    """Random (x_0, ..., x_k) in C (x)max C_{l1^k}; x_0 is taken large enough to pass the sign test."""
    for _ in range(max_tries):
        xs = rng.standard_normal((k + 1, alg.ambient_dim))
        xs[0] = jordan.random_cone_element(alg, rng).coords
        # smallest multiple c with c x0 + sum s_i x_i in the cone for all signs, found by bisection
        lo, hi = 0.0, 1.0
        while not cones.max_membership_ell1_factor(alg.cone, np.vstack([hi * xs[0], xs[1:]]))["member"]:
            hi *= 2
            if hi > 1e6:
                break
        else:
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                ok = cones.max_membership_ell1_factor(alg.cone, np.vstack([mid * xs[0], xs[1:]]))["member"]
                lo, hi = (lo, mid) if ok else (mid, hi)
            xs[0] *= hi * (1 + rng.uniform(0, 0.2))
            return xs / np.linalg.norm(xs)
    raise RuntimeError("could not sample a max-cone element")


def order_interval_check(x: JordanElement, tol: float = 1e-10) -> dict:
    """Truth table for: (e + x, e - x in C) => e - x^2 in C, and e - x^2 in C => e - x in C."""
    alg = x.algebra
    e = alg.identity

    def inside(v: JordanElement) -> bool:
        return jordan.min_eigenvalue(v) >= -tol

    x2 = jordan.jordan_product(x, x)
    p1 = inside(e + x) and inside(e - x)
    c1 = inside(e - x2)
    p2 = c1
    c2 = inside(e - x)
    return {
        "premise_1": p1, "conclusion_1": c1, "implication_1_holds": (not p1) or c1,
        "premise_2": p2, "conclusion_2": c2, "implication_2_holds": (not p2) or c2,
    }
