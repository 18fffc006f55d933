"""Command-line interface.

Exit codes: 0 success, 1 unknown subcommand, 2 unreadable or invalid input,
3 space mismatch, 4 a counterexample failed its own verification.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import group as grp
from . import sphere as sph
from .exceptions import (
    CharkernError,
    DomainError,
    PreconditionError,
    SpaceMismatchError,
)
from .forecast import load_records, monte_carlo_gap, score_report
from .kernel import KernelSpec, mmd_sq, verdict
from .measure import DiscreteSpace, SignedMeasure, density_to_measure, tv_norm
from .spectral import (
    mercer_decompose,
    near_zero_mmd_pair,
    no_uniform_perturbation,
    spectral_verdict,
    zero_mmd_pair,
)

COMMANDS = ("score", "verdict", "group-verdict", "sphere-verdict", "spectrum",
            "counterexample", "sphere-embed")

EXIT_UNKNOWN, EXIT_INPUT, EXIT_SPACE, EXIT_SELFCHECK = 1, 2, 3, 4


class InputError(CharkernError):
    pass


def _load_json(arg: str):
    """JSON from a file path, or inline JSON text."""
    p = Path(arg)
    try:
        text = p.read_text() if p.exists() else arg
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {arg!r}: {exc}") from None


def _moduli(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise InputError(f"bad moduli {text!r}") from None


def _load_kernel(args) -> KernelSpec:
    if getattr(args, "kernel", None):
        return KernelSpec.from_dict(_load_json(args.kernel))
    if getattr(args, "moduli", None) or getattr(args, "group", None):
        return _load_group_kernel(args).spec
    raise InputError("no kernel given (use --kernel, --gram or --moduli/--group)")


def _load_group_kernel(args) -> grp.GroupKernel:
    g = grp.GroupSpec(_moduli(args.moduli) if getattr(args, "moduli", None) else (args.group,))
    if getattr(args, "decay", None) is not None:
        return grp.kernel_from_coeffs(g, args.decay ** np.arange(g.order), symmetrize=False)
    if getattr(args, "coeffs", None):
        data = _load_json(args.coeffs)
        if isinstance(data, dict) and "coeffs" in data:
            data = data["coeffs"]
        return grp.kernel_from_coeffs(g, data, symmetrize=not args.no_symmetrize)
    if getattr(args, "kappa", None):
        data = _load_json(args.kappa)
        if isinstance(data, dict):
            data = data["kappa"]
        lam = grp.coeffs_from_kernel(g, data)
        if np.any(lam < 0):
            raise InputError("kappa has negative coefficients: it does not define a kernel")
        return grp.kernel_from_coeffs(g, np.maximum(lam, 0.0))
    raise InputError("group kernel needs --coeffs, --kappa or --decay")


def _emit(args, payload: dict, table=None):
    if args.json or table is None:
        print(json.dumps(payload, indent=2, default=_jsonable))
    else:
        table(payload)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def _print_verdict(p):
    for key in ("characteristic", "universal", "sipd_on_M", "strictly_pd"):
        if key in p:
            print(f"{key:16s} {p[key]}")
    for r in p.get("reasons", []):
        print(f"  - {r}")
    for w in p.get("witnesses", []):
        print("  witness: " + " ".join(f"{v:+.6g}" for v in w))


# --------------------------------------------------------------- commands

def cmd_score(args) -> int:
    k = _load_kernel(args)
    records = load_records(args.forecasts, k.space)
    compare = load_records(args.compare, k.space) if args.compare else None
    if args.simulate:
        rng = np.random.default_rng(args.seed)
        if compare is None:
            raise InputError("--simulate needs --compare")
        sims = [monte_carlo_gap(k, r.forecast, q.forecast, args.simulate, rng)
                for r, q in zip(records, compare)]
        payload = {"seed": args.seed, "samples": args.simulate, "records": sims}
        _emit(args, payload, _print_sim)
        return 0
    rep = score_report(k, records, compare)
    _emit(args, rep, _print_scores)
    return 0


def _print_sim(p):
    print(f"{'#':>4s} {'mean S(Q)-S(P)':>16s} {'stderr':>10s} {'mmd_sq/2':>10s}")
    for i, r in enumerate(p["records"]):
        print(f"{i:4d} {r['mean_difference']:16.6g} {r['stderr']:10.3g} {r['half_mmd_sq']:10.6g}")


def _print_scores(p):
    paired = "mean_score_b" in p
    head = f"{'id':>10s} {'obs':>8s} {'score':>12s}"
    if paired:
        head += f" {'score_b':>12s} {'diff':>12s} {'mmd_sq/2':>12s}"
    print(head)
    for r in p["records"]:
        line = f"{r['id']:>10s} {r['observation']:>8s} {r['score']:12.6g}"
        if paired:
            line += f" {r['score_b']:12.6g} {r['difference']:12.6g} {r['half_mmd_sq']:12.6g}"
        print(line)
    print(f"mean score: {p['mean_score']:.6g}")
    if paired:
        print(f"mean score (b): {p['mean_score_b']:.6g}   mean difference: {p['mean_difference']:.6g}")


def cmd_verdict(args) -> int:
    if args.gram:
        K = _load_json(args.gram)
        n = len(K)
        space = DiscreteSpace([str(i) for i in range(n)], args_nu(args, n))
        k = KernelSpec(space, K)
    else:
        k = _load_kernel(args)
    v = spectral_verdict(mercer_decompose(k)) if args.spectral else verdict(k)
    _emit(args, v.to_dict(), _print_verdict)
    return 0


def args_nu(args, n):
    if args.group is not None and args.group != n:
        raise SpaceMismatchError(f"--group {args.group} but the gram is {n}x{n}")
    return None


def cmd_group_verdict(args) -> int:
    gk = _load_group_kernel(args)
    v = grp.group_verdict(gk)
    payload = v.to_dict()
    payload["moduli"] = list(gk.group.moduli)
    payload["coeffs"] = gk.coeffs.tolist()
    payload["translation_invariant"] = gk.translation_invariant
    _emit(args, payload, _print_verdict)
    return 0


def _load_schoenberg(args) -> sph.SchoenbergKernel:
    data = _load_json(args.coeffs)
    if isinstance(data, list):
        data = {"b": data}
    d = args.d if args.d is not None else data.get("d")
    if d is None:
        raise InputError("sphere dimension missing (use --d or a 'd' entry)")
    tail = args.tail or data.get("tail", "unknown")
    kind = args.kind or data.get("kind", "d")
    return sph.SchoenbergKernel(int(d), data["b"], tail, kind, data.get("n0", args.n0))


def cmd_sphere_verdict(args) -> int:
    sk = _load_schoenberg(args)
    v = sph.sphere_verdict(sk, args.psi_class)
    payload = v.to_dict()
    payload.update({"d": sk.d, "kind": sk.kind, "tail": sk.tail})
    _emit(args, payload, _print_verdict)
    return 0


def cmd_spectrum(args) -> int:
    if getattr(args, "moduli", None) or getattr(args, "group", None):
        m = grp.group_mercer_expansion(_load_group_kernel(args))
    else:
        m = mercer_decompose(_load_kernel(args))
    _emit(args, m.to_dict())
    return 0


def _uniform_density(space):
    from .measure import Density
    return Density.uniform(space)


def cmd_counterexample(args) -> int:
    if args.moduli or args.group:
        gk = _load_group_kernel(args)
        k = gk.spec
        m = grp.group_mercer_expansion(gk)
    else:
        k = _load_kernel(args)
        m = mercer_decompose(k)
    checks = {}
    if args.kind == "near":
        Q1, Q2 = near_zero_mmd_pair(m, args.eps)
        tv, d2 = tv_norm(Q1 - Q2), mmd_sq(k, Q1 - Q2)
        checks["tv_equals_2"] = abs(tv - 2.0) <= 1e-12
        checks["sqrt_mmd_le_eps"] = np.sqrt(d2) <= args.eps * (1 + 1e-12)
        checks["probabilities"] = Q1.is_probability and Q2.is_probability
        pair = [Q1.mass, Q2.mass]
    elif args.kind == "zero":
        h1, h2 = zero_mmd_pair(m, _uniform_density(m.space), args.eps_tv)
        Q1, Q2 = density_to_measure(h1), density_to_measure(h2)
        tv, d2 = tv_norm(Q1 - Q2), mmd_sq(k, Q1 - Q2)
        checks["tv_equals_eps_tv"] = abs(tv - args.eps_tv) <= 1e-10
        checks["mmd_sq_vanishes"] = d2 <= 1e-12
        pair = [Q1.mass, Q2.mass]
    else:
        res = no_uniform_perturbation(m, args.index)
        P = SignedMeasure(m.space, m.space.nu)
        tv, d2 = tv_norm(P - res.Q), mmd_sq(k, P - res.Q)
        checks["probability"] = res.Q.is_probability
        checks["tv_ge_lower"] = tv >= res.tv_lower - 1e-12
        checks["mmd_sq_matches"] = abs(d2 - res.mmd_sq_exact) <= 1e-12
        pair = [P.mass, res.Q.mass]
    passed = all(bool(v) for v in checks.values())
    payload = {
        "kind": args.kind,
        "points": list(m.space.points),
        "Q1": pair[0], "Q2": pair[1],
        "verification": {"tv": tv, "mmd_sq": d2, "sqrt_mmd": float(np.sqrt(d2)),
                         "checks": {k_: bool(v) for k_, v in checks.items()},
                         "passed": passed},
    }
    print(json.dumps(payload, indent=2, default=_jsonable))
    return 0 if passed else EXIT_SELFCHECK


def cmd_sphere_embed(args) -> int:
    sk = _load_schoenberg(args)
    d = sk.d if sk.kind == "d" else (args.d or 2)
    v0 = np.zeros(d + 1)
    v0[-1] = 1.0
    if args.v0:
        v0 = np.array([float(s) for s in args.v0.split(",")])
        if v0.size != d + 1:
            raise InputError(f"v0 must have {d + 1} coordinates")
    p = sph.pna_coeffs(d, args.n, args.a, v0)
    emb = sph.zonal_embed(sk, p, d=d)
    payload = {"d": d, "n": args.n, "a": args.a, "v0": v0,
               "density_coeffs": p.to_dict()["blocks"],
               "embedding": emb.to_dict()["blocks"],
               "constant": sph.embedding_is_constant(emb)}
    _emit(args, payload)
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charkern", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, kernel=True, group=False):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if kernel:
            p.add_argument("--kernel", help="kernel JSON file or inline JSON")
        if group:
            p.add_argument("--group", type=int, help="cyclic group Z_N")
            p.add_argument("--moduli", help="comma-separated moduli, e.g. 2,2,6")
            p.add_argument("--coeffs", help="coefficient JSON (list or index->value map)")
            p.add_argument("--kappa", help="kappa JSON: kernel values k(0, x)")
            p.add_argument("--decay", type=float,
                           help="coefficients decay**i in flat index order (no symmetrization)")
            p.add_argument("--no-symmetrize", action="store_true")

    p = sub.add_parser("score", help="score forecasts with a kernel score")
    common(p)
    p.add_argument("--forecasts", required=True)
    p.add_argument("--compare", help="second forecaster, same records")
    p.add_argument("--simulate", type=int, default=0,
                   help="Monte Carlo: draw this many outcomes from each first forecast")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("verdict", help="characteristic / universal decision for a Gram matrix")
    common(p)
    p.add_argument("--gram", help="Gram matrix as JSON (file or inline)")
    p.add_argument("--group", type=int, help="check the Gram size against Z_N")
    p.add_argument("--spectral", action="store_true", help="decide from the Mercer expansion")
    p.set_defaults(func=cmd_verdict)

    p = sub.add_parser("group-verdict", help="verdict for a translation-invariant group kernel")
    common(p, kernel=False, group=True)
    p.set_defaults(func=cmd_group_verdict)

    for name, func in (("sphere-verdict", cmd_sphere_verdict), ("sphere-embed", cmd_sphere_embed)):
        p = sub.add_parser(name)
        common(p, kernel=False)
        p.add_argument("--coeffs", required=True, help='{"d": 2, "b": [...], "tail": "zero"}')
        p.add_argument("--d", type=int)
        p.add_argument("--tail", choices=sph.TAILS)
        p.add_argument("--kind", choices=("d", "infinity"))
        p.add_argument("--n0", type=int)
        if name == "sphere-verdict":
            p.add_argument("--class", dest="psi_class", choices=sph.PSI_CLASSES)
        else:
            p.add_argument("--n", type=int, required=True, help="degree of p_{n,a}")
            p.add_argument("--a", type=float, default=0.5)
            p.add_argument("--v0", help="comma-separated unit vector")
        p.set_defaults(func=func)

    p = sub.add_parser("spectrum", help="dump the Mercer expansion")
    common(p, group=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("counterexample", help="construct and self-verify a counterexample pair")
    common(p, group=True)
    p.add_argument("--kind", choices=("near", "zero", "uniform"), default="near")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--eps-tv", type=float, default=1.0)
    p.add_argument("--index", type=int, default=1)
    p.set_defaults(func=cmd_counterexample)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    first = next((a for a in argv if not a.startswith("-")), None)
    if first is not None and first not in COMMANDS and "-h" not in argv and "--help" not in argv:
        print(f"charkern: unknown subcommand {first!r}; choose from {', '.join(COMMANDS)}",
              file=sys.stderr)
        return EXIT_UNKNOWN
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpaceMismatchError, DomainError) as exc:
        print(f"charkern: space mismatch: {exc}", file=sys.stderr)
        return EXIT_SPACE
    except PreconditionError as exc:
        print(f"charkern: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CharkernError, KeyError, ValueError, TypeError) as exc:
        print(f"charkern: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
