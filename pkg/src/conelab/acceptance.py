"""The fourteen acceptance checks, runnable from the CLI (``suite``) and from pytest.

Each check returns a :class:`CriterionResult`. ``quick=True`` shrinks the
sample counts of the slow checks; the full setting uses the stated counts.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import compalg, cones, hurwitz, jordan, norms, psdmaps, sinkhorn


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.title} ({self.seconds:.2f} s)"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "details": self.details}


# wall-clock budgets in seconds, part of the pass condition
RUNTIME_LIMITS = {1: 1.0, 5: 60.0, 10: 30.0}


def _timed(number, title, fn, *args):
    t0 = time.perf_counter()
    passed, details = fn(*args)
    seconds = time.perf_counter() - t0
    limit = RUNTIME_LIMITS.get(number)
    if limit is not None:
        details = {**details, "runtime_limit": limit, "within_runtime": seconds < limit}
        passed = passed and seconds < limit
    return CriterionResult(number, title, bool(passed), details, seconds)


# ---------------------------------------------------------------------------


def composition_law(seed: int, quick: bool = False):
    rng = np.random.default_rng(seed)
    worst = {}
    for kind in compalg.KINDS:
        A = compalg.algebra(kind)
        x = rng.standard_normal((1000, A.dim))
        y = rng.standard_normal((1000, A.dim))
        xy = compalg.multiply(A, x, y)
        q = lambda v: (A.qform * v * v).sum(axis=1)  # noqa: E731
        worst[kind] = float(np.abs(q(xy) - q(x) * q(y)).max())
    return all(v <= 1e-12 for v in worst.values()), {"max_residual": worst}


def multiplication_isometry(seed: int, quick: bool = False):
    out = {}
    for kind in ("R", "C", "H", "O"):
        A = compalg.algebra(kind)
        M = A.mult_matrix().astype(np.int64)
        out[kind] = bool(np.array_equal(M @ M.T, A.dim * np.eye(A.dim, dtype=np.int64)))
    return all(out.values()), {"exact": out}


def protocol_thresholds(seed: int, quick: bool = False):
    rng = np.random.default_rng(seed)
    thresholds, step_err = {}, {}
    ok = True
    for k1 in ("R", "Csplit"):
        for k2 in ("R", "C", "H", "O"):
            P = compalg.protocol_cone(k1, k2)
            n = P.n
            expected = 1.0 / n if k1 == "R" else 1.0 / (n + 1)
            th = compalg.protocol_threshold(P)
            thresholds[f"{k1},{k2}"] = {"value": th, "expected": expected}
            ok &= abs(th - expected) <= 1e-9
            err = 0.0
            for _ in range(20):
                a, b = rng.uniform(0.1, 2.0), rng.uniform(-1.0, 1.0)
                c = np.array(compalg.protocol_step(P, a, b))
                m = np.array(compalg.protocol_step_matrix(P, a, b))
                err = max(err, float(np.abs(c - m).max()))
            step_err[f"{k1},{k2}"] = err
            ok &= err <= 1e-10
    return ok, {"thresholds": thresholds, "closed_vs_matrix": step_err}


def twirl_check(seed: int, quick: bool = False):
    rng = np.random.default_rng(seed)
    worst = {}
    for n in (2, 3, 5):
        w = 0.0
        for _ in range(10):
            L = rng.standard_normal((n + 1, n + 1))
            exact = cones.twirl(L)
            if exact.alpha != L[0, 0] or abs(exact.beta - np.trace(L[1:, 1:]) / n) > 1e-15:
                return False, {"formula": "closed form differs from L00 / mean diagonal"}
            mc = cones.twirl_monte_carlo(L, 10_000, rng)
            w = max(w, float(np.abs(mc - exact.matrix()).max()))
        worst[n] = w
    return all(v <= 5e-2 for v in worst.values()), {"max_entry_deviation": worst}


def _product_pairings(z: np.ndarray, rng, m: int, chunk: int = 20_000) -> float:
    n, k = z.shape[0], z.ndim
    worst = 0.0
    for start in range(0, m, chunk):
        b = min(chunk, m - start)
        us = rng.standard_normal((k, b, n))
        us /= np.linalg.norm(us, axis=2, keepdims=True)
        Y = us[0] @ z.reshape(n, -1)
        for i in range(1, k):
            Y = np.einsum("bi,bij->bj", us[i], Y.reshape(b, n, -1))
        worst = max(worst, float(np.abs(Y).max()))
    return worst


def witness_tensors(seed: int, quick: bool = False):
    rng = np.random.default_rng(seed)
    samples = 10_000 if quick else 100_000
    pairs = [(n, k) for n in (2, 3, 4) for k in (2, 3, 4, 5)] + [(8, 2), (8, 3)]
    rows, ok = [], True
    t0 = time.perf_counter()
    for n, k in pairs:
        w = hurwitz.witness_tensor(n, k)
        N = hurwitz.N_of(n)
        exact_sum = w.total_sq_norm == N * n ** k
        bound = w.sq_norm * N >= n ** k
        worst = _product_pairings(np.asarray(w.coords), rng, samples)
        good = exact_sum and bound and worst <= 1 + 1e-9
        ok &= good
        rows.append({"n": n, "k": k, "N": N, "sq_norm": w.sq_norm, "total": w.total_sq_norm,
                     "max_product_pairing": worst, "ok": good})
    elapsed = time.perf_counter() - t0
    return ok and elapsed < 60, {"rows": rows, "samples": samples, "seconds": elapsed}


def not_annihilating_certificate(seed: int, quick: bool = False):
    pair = hurwitz.lorentz_witness_pair(2, 2)
    P = cones.LinearMapDense(np.eye(3), cones.lorentz(2), cones.lorentz(2))
    cert = cones.certify_not_annihilating(P, 2, pair["z_plus"], pair["z_minus"], seed=seed)
    if cert is None:
        return False, {"certificate": None}
    value = cert.payload["pairing_value"]
    valid = cones.verify_certificate(cones.Certificate.from_json(cert.to_json()))
    return value == -1.0 and valid, {"pairing_value": value, "valid": valid,
                                     "claims": cert.payload["claims"]}


def tau_lower_bounds(seed: int, quick: bool = False):
    X = norms.l2(2)
    rows = []
    for k in range(1, 9):
        tb = norms.tau_bounds(np.eye(2), X, X, k, rng=np.random.default_rng(seed))
        rows.append({"k": k, "lower": tb.lower, "upper": tb.upper})
    lowers = [r["lower"] for r in rows]
    mono = all(b >= a - 1e-12 for a, b in zip(lowers, lowers[1:]))
    uppers_ok = all(abs(r["upper"] - 2.0) <= 1e-9 for r in rows)
    return lowers[-1] >= 1.834 and mono and uppers_ok, {"rows": rows, "nondecreasing": mono}


def isotropic_central_consistency(seed: int, quick: bool = False):
    rng = np.random.default_rng(seed)
    mismatches, thresholds = 0, {}
    for n in (2, 3, 5):
        X = norms.l2(n)
        for _ in range(100):
            a = rng.uniform(0.1, 2.0)
            b = rng.uniform(-2 * a / n, 2 * a / n)
            iso = cones.isotropic_eb(cones.IsotropicMap(a, b, n))
            cen = cones.central_eb(a, b * np.eye(n), X, X)
            mismatches += iso != cen
        nuc = norms.nuclear_norm(np.eye(n), X, X)["value"]
        thresholds[n] = {"threshold": 1.0 / nuc, "expected": 1.0 / n}
    th_ok = all(abs(v["threshold"] - v["expected"]) <= 1e-12 for v in thresholds.values())
    return mismatches == 0 and th_ok, {"mismatches": mismatches, "thresholds_at_alpha_1": thresholds}


def breuer_hall_factorization(seed: int, quick: bool = False):
    B = psdmaps.named_map("breuer_hall")
    f = psdmaps.lorentz_factorize(B)
    ap = psdmaps.breuer_hall_embedding()
    A6 = np.diag([1.0] + [-1.0] * 5)
    # the printed embedding has alpha A alpha^* = 2B for the trace pairing
    printed = 0.5 * ap @ A6 @ ap.T
    emb_err = float(np.abs(f.map_matrix() - printed).max())
    R2 = psdmaps.lorentz_factorize(psdmaps.named_map("reduction", 2))
    spinor = psdmaps.reduction_spinor_factorization()
    spectra = {}
    for d in (2, 3):
        R = psdmaps.named_map("reduction", d)
        S = (R @ psdmaps.transpose_map(d)).matrix
        vals = np.round(np.linalg.eigvalsh((S + S.T) / 2), 10)
        u, c = np.unique(vals, return_counts=True)
        spectra[d] = {"computed": {float(x): int(m) for x, m in zip(u[::-1], c[::-1])},
                      "claimed_set": [d - 1, -1],
                      "matches_claim": set(u.tolist()) == {float(d - 1), -1.0}}
    ok = (f.k == 5 and f.residual <= 1e-10 and emb_err <= 1e-10 and R2.k <= 3
          and spinor.residual <= 1e-10)
    return ok, {"breuer_hall_k": f.k, "residual": f.residual, "embedding_max_error": emb_err,
                "reduction_d2_k": R2.k, "spinor_residual": spinor.residual,
                "reduction_theta_spectra": spectra}


def sinkhorn_convergence(seed: int, quick: bool = False):
    count = 20 if quick else 100
    t0 = time.perf_counter()
    worst, ok = {}, True
    for cone in (cones.psd(2), cones.psd(3), cones.lorentz(3)):
        rng = np.random.default_rng(seed)
        w = {"residual_unital": 0.0, "residual_trace": 0.0, "lambda_error": 0.0, "iterations": 0}
        for _ in range(count):
            P = sinkhorn.random_strictly_positive_map(cone, rng)
            r = sinkhorn.sinkhorn_scale(P, tol=1e-9, max_iter=10_000, rng=rng)
            w["residual_unital"] = max(w["residual_unital"], r.residual_unital)
            w["residual_trace"] = max(w["residual_trace"], r.residual_trace)
            w["lambda_error"] = max(w["lambda_error"], abs(r.lam - 1))
            w["iterations"] = max(w["iterations"], r.iterations)
        ok &= (w["residual_unital"] <= 1e-9 and w["residual_trace"] <= 1e-9
               and w["lambda_error"] <= 1e-8 and w["iterations"] <= 10_000)
        worst[f"{cone.kind}:{cone.param}"] = w
    elapsed = time.perf_counter() - t0
    return ok and elapsed < 30, {"maps_per_cone": count, "worst": worst, "seconds": elapsed}


def ell1_break(seed: int, quick: bool = False):
    count = 20 if quick else 100
    rows, ok = [], True
    for alg in (jordan.spin(2), jordan.hermitian(2), jordan.hermitian(3)):
        for k in (2, 3, 4):
            rng = np.random.default_rng(seed)
            slack_min, resid, invalid = np.inf, 0.0, 0
            for _ in range(count):
                xs = sinkhorn.sample_max_ell1(alg, k, rng)
                dec = sinkhorn.ell1_break_decompose(alg, xs)
                v = dec.verify(tol=1e-9, reconstruction=1e-10)
                slack_min = min(slack_min, dec.slack_min_eigenvalue)
                resid = max(resid, dec.relative_residual)
                invalid += not v["valid"]
            good = slack_min >= -1e-9 and resid <= 1e-10 and invalid == 0
            ok &= good
            rows.append({"algebra": f"{alg.kind}:{alg.param}", "k": k, "slack_min": slack_min,
                         "max_relative_residual": resid, "invalid": invalid})
    return ok, {"inputs_per_case": count, "rows": rows}


def projection_agreement(seed: int, quick: bool = False):
    rng = np.random.default_rng(seed)
    agree, idem = 0.0, 0.0
    for n in (1, 2, 3):
        for k in (1, 2, 3, 4):
            for _ in range(100):
                z = rng.standard_normal((n + 1,) * k)
                p = norms.project_Xk(z)
                agree = max(agree, float(np.abs(p - norms.project_Xk_product(z)).max()))
                idem = max(idem, float(np.abs(norms.project_Xk(p) - p).max()))
    violations = 0
    samples = 20 if quick else 100
    for C, k in ((cones.ell1(2), 2), (cones.ell1(2), 3), (cones.ellinf(2), 2)):
        for _ in range(samples):
            t = cones.sample_max_tensor(C, k, rng)
            violations += not cones.polyhedral_max_membership(norms.project_Xk(t), C, k)["member"]
            t = cones.sample_min_tensor(C, k, rng)
            violations += not cones.polyhedral_min_membership(norms.project_Xk(t), C, k)["member"]
    ok = agree <= 1e-12 and idem == 0.0 and violations == 0
    return ok, {"max_disagreement": agree, "idempotence_error": idem,
                "cone_violations": violations, "cone_samples_per_case": samples}


def jordan_suite(seed: int, quick: bool = False):
    trials = 200 if quick else 1000
    report = {}
    for alg in (jordan.spin(3), jordan.hermitian(2), jordan.hermitian(3)):
        rng = np.random.default_rng(seed)
        v = dict.fromkeys(("jordan_identity", "spectral_round_trip", "order_implication_1", "order_implication_2",
                           "q_positive", "q_inverse"), 0)
        for _ in range(trials):
            x = jordan.random_element(alg, rng)
            y = jordan.random_element(alg, rng)
            sx = max(x.norm(), 1e-300)
            x2 = jordan.jordan_product(x, x)
            lhs = jordan.jordan_product(jordan.jordan_product(x2, y), x)
            rhs = jordan.jordan_product(x2, jordan.jordan_product(y, x))
            v["jordan_identity"] += (lhs - rhs).norm() > 1e-12 * sx ** 3 * y.norm()
            sd = jordan.spectral_decompose(x)
            v["spectral_round_trip"] += (sd.reconstruct() - x).norm() > 1e-12 * sx

            lam = np.abs(jordan.spectral_decompose(y).eigenvalues).max()
            z = y * (rng.uniform(0.3, 1.6) / lam)
            rep = sinkhorn.order_interval_check(z)
            v["order_implication_1"] += not rep["implication_1_holds"]
            v["order_implication_2"] += not rep["implication_2_holds"]

            c = jordan.random_cone_element(alg, rng)
            Qx = jordan.quadratic_rep(x)
            v["q_positive"] += not jordan.in_cone(jordan.JordanElement(alg, Qx(c.coords)), 1e-9)

            inv = jordan.det_inv(x)["inverse"]
            if inv is not None:
                ev = np.abs(sd.eigenvalues)
                cond = ev.max() / ev.min()
                err = np.abs(jordan.quadratic_rep(inv).matrix @ Qx.matrix - np.eye(alg.ambient_dim)).max()
                v["q_inverse"] += err > 1e-13 * cond ** 2
        report[f"{alg.kind}:{alg.param}"] = v
    ok = all(val == 0 for r in report.values() for val in r.values())
    return ok, {"trials_per_algebra": trials, "violations": report}


def sqrt2_experiment(seed: int, quick: bool = False):
    """Outcome is recorded; the check passes when the experiment runs to completion."""
    rng = np.random.default_rng(seed)
    C = cones.ell1(2)
    D = np.diag([np.sqrt(2), 1.0, 1.0])
    samples = 200 if quick else 1000
    entangled_inputs, failures, certified = 0, [], 0
    for _ in range(samples):
        t = cones.sample_max_tensor(C, 2, rng)
        if not cones.polyhedral_min_membership(t, C, 2)["member"]:
            entangled_inputs += 1
        out = D @ t @ D
        res = cones.polyhedral_min_membership(out, C, 2)
        if res["member"]:
            certified += cones.verify_certificate(res["certificate"])
        else:
            failures.append({"input": t.tolist(), "separation_value": res["separation_value"]})
    details = {"samples": samples, "inputs_outside_min_cone": entangled_inputs,
               "outputs_in_min_cone_certified": certified, "counterexamples": len(failures),
               "counterexample_data": failures[:5],
               "conclusion": "no counterexample found" if not failures else "counterexample found"}
    return True, details


CRITERIA = [
    (1, "composition-law residual", composition_law),
    (2, "multiplication tensor isometry", multiplication_isometry),
    (3, "protocol thresholds and closed-form step", protocol_thresholds),
    (4, "twirl formula vs Monte-Carlo", twirl_check),
    (5, "witness tensors", witness_tensors),
    (6, "non-annihilation certificate", not_annihilating_certificate),
    (7, "tau lower bounds for id on l2^2", tau_lower_bounds),
    (8, "isotropic vs central EB consistency", isotropic_central_consistency),
    (9, "Breuer-Hall and reduction factorization", breuer_hall_factorization),
    (10, "Sinkhorn scaling", sinkhorn_convergence),
    (11, "l1-break decomposition", ell1_break),
    (12, "projection agreement", projection_agreement),
    (13, "Jordan suite", jordan_suite),
    (14, "I_sqrt2 experiment on l1^2 (recorded)", sqrt2_experiment),
]


def run_criterion(number: int, seed: int = 0, quick: bool = False) -> CriterionResult:
    for num, title, fn in CRITERIA:
        if num == number:
            return _timed(num, title, fn, seed, quick)
    raise KeyError(number)


def run_all(seed: int = 0, quick: bool = False, only=None) -> list[CriterionResult]:
    return [run_criterion(num, seed, quick) for num, _, _ in CRITERIA
            if only is None or num in only]
