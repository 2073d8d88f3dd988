"""Command-line entry point: ``conelab <command> [options]``.

Every command writes one JSON report ``{command, config, results,
certificates}`` to stdout or ``--out`` (written atomically). Exit codes:
0 success, 1 verification failure, 2 usage or input error. The environment
variable CONELAB_SEED takes precedence over ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import acceptance, compalg, cones, hurwitz, jordan, norms, psdmaps, sinkhorn


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    tol: float = 1e-9
    budget: int = 10 ** 8
    output: str = "json"
    out_path: str | None = None


@dataclass
class Report:
    command: str
    config: RunConfig
    results: dict
    certificates: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self, include_timings: bool = False) -> dict:
        out = {"command": self.command, "config": asdict(self.config),
               "results": self.results, "certificates": self.certificates}
        if include_timings:
            out["timings"] = self.timings
        return out


def _plain(obj):
    """Convert numpy and library objects for json.dumps."""
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    # json uses repr for floats, the shortest string that parses back equal
    return json.dumps(obj, default=_plain, indent=2, sort_keys=True)


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".conelab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _parse_cone(text: str) -> cones.ConeHandle:
    """``psd:d``, ``spin:m`` (spin factor on R^m, i.e. the Lorentz cone L_{m-1}), ``lorentz:n``, ``ell1:k``, ``ellinf:k``."""
    try:
        kind, param = text.split(":")
        param = int(param)
    except ValueError as exc:
        raise UsageError(f"bad cone {text!r}; expected kind:param") from exc
    if kind == "spin":
        return cones.lorentz(param - 1)
    if kind in ("psd", "lorentz", "ell1", "ellinf", "simplex"):
        return cones.ConeHandle(kind, param)
    raise UsageError(f"unknown cone kind {kind!r}")


_NORM_KINDS = {"injective": "injective", "eps": "injective", "projective": "projective",
               "pi": "projective", "operator": "operator", "op": "operator", "nuclear": "nuclear"}


def _parse_space(text: str, dim: int | None = None) -> norms.SpaceDescriptor:
    if ":" not in text and dim is not None:
        text = f"{text}:{dim}"
    try:
        kind, n = text.split(":")
        return {"l1": norms.l1, "l2": norms.l2, "linf": norms.linf}[kind](int(n))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad space {text!r}; expected l1:n, l2:n or linf:n") from exc


def _hermitian(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.array(obj["re"], dtype=float) + 1j * np.array(obj.get("im", 0.0), dtype=float)
    return np.array(obj, dtype=complex)


# ---------------------------------------------------------------------------
# commands


def cmd_protocol(args, cfg: RunConfig) -> Report:
    P = compalg.protocol_cone(args.alg1, args.alg2)
    res = {"alg1": args.alg1, "alg2": args.alg2, "N": P.N, "n": P.n}
    if args.threshold:
        res["threshold"] = compalg.protocol_threshold(P, tol=min(cfg.tol, 1e-12))
    if args.beta0 is not None:
        res["trajectory"] = compalg.iterate(P, args.beta0, args.steps)
    if args.alpha is not None and args.beta is not None:
        res["step"] = list(compalg.protocol_step(P, args.alpha, args.beta))
    return Report("protocol", cfg, res)


def cmd_witness(args, cfg: RunConfig) -> Report:
    w = hurwitz.witness_tensor(args.n, args.k)
    res = {"n": w.n, "k": w.k, "N": w.N, "sq_norm": w.sq_norm, "source": list(w.source),
           "total_sq_norm": w.total_sq_norm, "guaranteed": args.n ** args.k / w.N}
    if args.include_tensor:
        res["tensor"] = w.flat()
    if args.alpha is not None and args.beta is not None:
        res["eb_bounds"] = hurwitz.eb_bound_from_witness(args.n, args.alpha, args.beta, [args.k])
    certs = []
    if args.certify:
        pair = hurwitz.lorentz_witness_pair(args.n, args.k)
        P = cones.LinearMapDense(np.eye(args.n + 1), cones.lorentz(args.n), cones.lorentz(args.n))
        cert = cones.certify_not_annihilating(P, args.k, pair["z_plus"], pair["z_minus"],
                                              tol=cfg.tol, seed=cfg.seed)
        if cert is not None:
            certs.append(cert.to_json())
        res["pairing"] = None if cert is None else cert.payload["pairing_value"]
    return Report("witness", cfg, res, certs)


def _load_matrix(args, n_default=None) -> np.ndarray:
    if args.input:
        obj = _load_json(args.input)
        return np.array(obj["matrix"] if isinstance(obj, dict) else obj, dtype=float)
    if n_default is None:
        raise UsageError("--input is required")
    return np.eye(n_default)


def cmd_tau(args, cfg: RunConfig) -> Report:
    X = _parse_space(args.space, args.dim)
    Y = _parse_space(args.codomain, args.dim) if args.codomain else X
    T = _load_matrix(args, X.n)
    rows = []
    for k in range(1, args.k_max + 1):
        tb = norms.tau_bounds(T, X, Y, k, rng=np.random.default_rng(cfg.seed))
        rows.append({"k": k, "lower": tb.lower, "upper": tb.upper, "reference": tb.reference,
                     "witnesses": tb.witnesses})
    return Report("tau", cfg, {"space": args.space, "codomain": args.codomain or args.space,
                               "rows": rows})


def cmd_norm(args, cfg: RunConfig) -> Report:
    X = _parse_space(args.space, args.dim)
    rng = np.random.default_rng(cfg.seed)
    kind = _NORM_KINDS[args.kind]
    if kind in ("operator", "nuclear"):
        Y = _parse_space(args.codomain, args.dim) if args.codomain else X
        P = _load_matrix(args, X.n)
        if kind == "operator":
            res = {"value": norms.operator_norm(P, X, Y), "exact": True}
        else:
            res = norms.nuclear_norm(P, X, Y)
    else:
        if not args.input:
            raise UsageError("--input tensor file is required")
        z = np.array(_load_json(args.input), dtype=float)
        fn = norms.injective_norm if kind == "injective" else norms.projective_norm
        res = fn(z, X, rng=rng)
    return Report("norm", cfg, {"kind": kind, **res})


def cmd_sinkhorn(args, cfg: RunConfig) -> Report:
    cone = _parse_cone(args.cone)
    rng = np.random.default_rng(cfg.seed)
    if args.map:
        obj = _load_json(args.map)
        P = cones.LinearMapDense(np.array(obj["matrix"], dtype=float), cone, cone)
    else:
        P = sinkhorn.random_strictly_positive_map(cone, rng)
    r = sinkhorn.sinkhorn_scale(P, tol=cfg.tol, max_iter=args.max_iter, rng=rng)
    return Report("sinkhorn", cfg, r.to_json())


def cmd_ell1break(args, cfg: RunConfig) -> Report:
    cone = _parse_cone(args.cone)
    alg = jordan.algebra_of_cone(cone)
    if args.input:
        xs = np.array(_load_json(args.input), dtype=float)
        if xs.shape[0] != args.k + 1:
            raise UsageError(f"input must have k + 1 = {args.k + 1} rows")
    else:
        xs = sinkhorn.sample_max_ell1(alg, args.k, np.random.default_rng(cfg.seed))
    try:
        dec = sinkhorn.ell1_break_decompose(alg, xs, tol=cfg.tol)
    except sinkhorn.MaxMembershipError as exc:
        cert = cones.Certificate("membership_max_violation", {
            "test": "sign_vector", "cone": cone.to_json(),
            "tensors": {"xs": xs.tolist()}, "violating_sign": exc.violating_sign,
            "tolerances": {"tol": cfg.tol}, "seed": cfg.seed})
        return Report("ell1break", cfg, {"accepted": False, "verified": False},
                      [cert.to_json()])
    report = dec.verify()
    res = {"accepted": True, "verified": report["valid"], "decomposition": dec.to_json()}
    return Report("ell1break", cfg, res, [dec.certificate().to_json()])


def _named_or_file(spec: str) -> psdmaps.HermMap:
    if spec.startswith("reduction:"):
        return psdmaps.named_map("reduction", int(spec.split(":")[1]))
    if spec in ("breuer-hall", "breuer_hall"):
        return psdmaps.named_map("breuer_hall")
    return psdmaps.HermMap.from_json(_load_json(spec))


def cmd_factorize(args, cfg: RunConfig) -> Report:
    P = _named_or_file(args.map)
    theta = psdmaps.transpose_map(P.d_in)
    S = (P @ theta).matrix
    spectra = {"P": np.sort(np.linalg.eigvalsh((P.matrix + P.matrix.T) / 2))[::-1],
               "P_theta": np.sort(np.linalg.eigvalsh((S + S.T) / 2))[::-1]}
    try:
        f = psdmaps.lorentz_factorize(P, rng=np.random.default_rng(cfg.seed))
    except psdmaps.FactorizationRefused as exc:
        return Report("factorize", cfg, {"accepted": False, "reason": str(exc),
                                         "offending": exc.offending, "spectra": spectra})
    except psdmaps.CanonicalFormError as exc:
        return Report("factorize", cfg, {"accepted": False, "reason": str(exc), "spectra": spectra})
    lambdas = (f.eigenvalues / f.eigenvalues[0])[1:]
    res = {"accepted": True, "k": f.k, "lambdas": lambdas[np.abs(lambdas) > 1e-9],
           "residual": f.residual, "positivity_min_eig": f.positivity_min_eig,
           "alpha_map": f.alpha_map, "spectra": spectra}
    return Report("factorize", cfg, res)


def cmd_membership(args, cfg: RunConfig) -> Report:
    rng = np.random.default_rng(cfg.seed)
    if args.psd_lorentz:
        obj = _load_json(args.psd_lorentz)
        mats = [_hermitian(m) for m in (obj["matrices"] if isinstance(obj, dict) else obj)]
        r = psdmaps.lorentz_psd_max_membership(mats, tol=1e-8, rng=rng, starts=args.starts)
        certs = [r["certificate"].to_json()] if r["certificate"] is not None else []
        res = {k: v for k, v in r.items() if k != "certificate"}
        return Report("membership", cfg, res, certs)
    if args.qubit:
        Z = _hermitian(_load_json(args.qubit))
        r = norms.hat_check_membership_qubit(Z, rng=rng)
        return Report("membership", cfg, r)
    if args.ell1_factor:
        cone = _parse_cone(args.cone or "")
        xs = np.array(_load_json(args.ell1_factor), dtype=float)
        r = cones.max_membership_ell1_factor(cone, xs, cfg.tol)
        return Report("membership", cfg, r)
    raise UsageError("one of --psd-lorentz, --qubit or --ell1-factor is required")


def cmd_certify(args, cfg: RunConfig) -> Report:
    obj = _load_json(args.input)
    items = obj.get("certificates", [obj]) if isinstance(obj, dict) else obj
    results = []
    for item in items:
        cert = cones.Certificate.from_json(item)
        results.append({"kind": cert.kind, "valid": cones.verify_certificate(cert)})
    return Report("certify", cfg, {"checked": results,
                                   "all_valid": all(r["valid"] for r in results)})


def cmd_suite(args, cfg: RunConfig) -> Report:
    only = None
    if args.only:
        only = {int(x) for x in args.only.split(",")}
    rows = acceptance.run_all(seed=cfg.seed, quick=args.quick, only=only)
    for r in rows:
        print(r.line(), file=sys.stderr)
    timings = {str(r.number): r.seconds for r in rows}
    res = {"quick": args.quick, "criteria": [{**r.to_json(), "seconds": None} for r in rows],
           "all_passed": all(r.passed for r in rows)}
    return Report("suite", cfg, res, timings=timings)


def _failed(report: Report) -> bool:
    r = report.results
    if report.command == "suite":
        return not r["all_passed"]
    if report.command == "certify":
        return not r["all_valid"]
    if report.command == "ell1break":
        return not r["verified"]
    return False


def _to_csv(report: Report) -> str:
    buf = io.StringIO()
    if report.command == "tau":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "lower", "upper"])
        for row in report.results["rows"]:
            w.writerow([row["k"], repr(row["lower"]), repr(row["upper"])])
        return buf.getvalue()
    if report.command == "suite":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["criterion", "title", "passed"])
        for row in report.results["criteria"]:
            w.writerow([row["number"], row["title"], row["passed"]])
        return buf.getvalue()
    raise UsageError(f"csv output is not available for {report.command}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conelab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--budget", type=int, default=10 ** 8)
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--out", dest="out_path")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("protocol", parents=[common], help="distillation protocol on L_N")
    s.add_argument("--alg1", choices=("R", "Csplit"), required=True)
    s.add_argument("--alg2", choices=("R", "C", "H", "O"), required=True)
    s.add_argument("--threshold", action="store_true")
    s.add_argument("--beta0", type=float)
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.set_defaults(func=cmd_protocol)

    s = sub.add_parser("witness", parents=[common], help="Hurwitz-Radon witness tensors")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--include-tensor", action="store_true")
    s.add_argument("--certify", action="store_true", help="emit the z+/z- certificate for id on L_n")
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("tau", parents=[common], help="bounds on tau_k")
    s.add_argument("--space", default="l2:2", help="l1:n, l2:n, linf:n, or a bare kind with --dim")
    s.add_argument("--dim", type=int)
    s.add_argument("--codomain")
    s.add_argument("--k-max", "--kmax", dest="k_max", type=int, default=8)
    s.add_argument("--input", "--file", dest="input", help="JSON matrix (default: identity)")
    s.set_defaults(func=cmd_tau)

    s = sub.add_parser("norm", parents=[common], help="tensor and operator norms")
    s.add_argument("--kind", choices=tuple(_NORM_KINDS), required=True)
    s.add_argument("--space", required=True, help="l1:n, l2:n, linf:n, or a bare kind with --dim")
    s.add_argument("--dim", type=int)
    s.add_argument("--codomain")
    s.add_argument("--input", "--file", dest="input",
                   help="JSON tensor or matrix (operator/nuclear default: identity)")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("sinkhorn", parents=[common], help="Sinkhorn scaling on a symmetric cone")
    s.add_argument("--cone", required=True, help="psd:d or spin:m")
    s.add_argument("--map", help="JSON {matrix} in Jordan coordinates (default: random map)")
    s.add_argument("--max-iter", type=int, default=10_000)
    s.set_defaults(func=cmd_sinkhorn)

    s = sub.add_parser("ell1break", parents=[common], help="min-cone decomposition for id (x) I_sqrt(k)")
    s.add_argument("--cone", required=True, help="psd:d or spin:m")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--input", help="JSON rows x_0..x_k (default: random max-cone element)")
    s.set_defaults(func=cmd_ell1break)

    s = sub.add_parser("factorize", parents=[common], help="Lorentz factorization of a map")
    s.add_argument("--map", required=True, help="reduction:d, breuer-hall or a JSON map file")
    s.set_defaults(func=cmd_factorize)

    s = sub.add_parser("membership", parents=[common], help="tensor-product membership tests")
    s.add_argument("--psd-lorentz", help="JSON list of Hermitian matrices X_0..X_n")
    s.add_argument("--qubit", help="JSON 4x4 Hermitian matrix for the hat/check test")
    s.add_argument("--ell1-factor", help="JSON rows x_0..x_k for C (x)max C_l1^k")
    s.add_argument("--cone", help="cone for --ell1-factor")
    s.add_argument("--starts", type=int, default=1000)
    s.set_defaults(func=cmd_membership)

    s = sub.add_parser("certify", parents=[common], help="re-check certificates from a file")
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.add_argument("--quick", action="store_true")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_suite)
    return p


def run(argv=None) -> tuple[int, Report | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    seed = args.seed
    if os.environ.get("CONELAB_SEED"):
        try:
            seed = int(os.environ["CONELAB_SEED"])
        except ValueError:
            print("conelab: CONELAB_SEED must be an integer", file=sys.stderr)
            return 2, None
    cfg = RunConfig(seed=seed, tol=args.tol, budget=args.budget, output=args.output,
                    out_path=args.out_path)
    t0 = time.perf_counter()
    try:
        report = args.func(args, cfg)
        report.timings.setdefault("total", time.perf_counter() - t0)
        text = _to_csv(report) if cfg.output == "csv" else dumps(report.to_json(args.timings)) + "\n"
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"conelab: error: {exc}", file=sys.stderr)
        return 2, None
    except (ValueError, KeyError, TypeError) as exc:
        print(f"conelab: invalid input: {exc}", file=sys.stderr)
        return 2, None
    except (RuntimeError, ArithmeticError) as exc:
        print(f"conelab: computation failed: {exc}", file=sys.stderr)
        return 1, None
    if cfg.out_path:
        write_atomic(cfg.out_path, text)
    else:
        sys.stdout.write(text)
    return (1 if _failed(report) else 0), report


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
