"""Command-line drivers for the full testing pipeline.

Subcommands:

* ``simulate``         -- generate network data (CSV + sidecar) or exact
                          influence-model distributions (JSON);
* ``find-test``        -- search for a witness observable on an input
                          distribution, validate the certificate, and issue
                          a distance verdict;
* ``check-equalities`` -- exact sign test of a ready-made observable;
* ``jpe``              -- per-equality symmetry report for a model variant;
* ``certify``          -- re-validate a stored certificate against data.

Every command writes JSON artifacts that embed the full run configuration,
and exits 0 on success, 2 on usage errors, 3 on resource limits, 4 on
solver failures.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import equalities, exchangeability, handelman, simulate, stats
from .lp import SolverError
from .models import ModelClass

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_SOLVER = 4


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
    print(f"wrote {path}")


def _model_from_args(args) -> ModelClass:
    if args.delta_l is None and args.delta_u is None:
        return ModelClass.non_causal(args.T)
    if args.delta_l is None or args.delta_u is None:
        raise UsageError("provide both --delta-l and --delta-u, or neither")
    return ModelClass.bounded_influence(args.T, args.delta_l, args.delta_u)


class UsageError(RuntimeError):
    pass


def _load_empirical(path, scale_m: int):
    """Input file -> (EmpiricalDistribution, frequencies, is_exact)."""
    p, M, T, meta = simulate.read_distribution(path)
    if M is not None:
        counts = np.rint(p * M).astype(np.int64)
        emp = simulate.EmpiricalDistribution(T, counts, meta)
        return emp, p, False
    counts = np.rint(p * scale_m).astype(np.int64)
    emp = simulate.EmpiricalDistribution(T, counts, meta)
    return emp, p, True


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    config = dict(vars(args))
    config.pop("func", None)
    if args.model in ("delayed", "instant"):
        model = simulate.InfluenceModel(args.model, args.delta, args.T)
        if args.exact:
            simulate.write_exact_json(args.out, model, {"generator": args.model, "config": config})
            print(f"wrote {args.out}")
            return EXIT_OK
        emp = simulate.sample_influence_model(model, args.M, args.seed)
        emp.meta.update({"seed": args.seed, "config": config})
        emp.write_csv(args.out)
        print(f"wrote {args.out} (M={emp.M})")
        return EXIT_OK
    if args.exact:
        raise UsageError("--exact applies only to the delayed/instant models")
    cfg = simulate.NetworkSimConfig(
        kind=args.model, M=args.M, seed=args.seed, T=args.T, nodes=args.nodes
    )
    emp = simulate.simulate(cfg)
    emp.meta["config"] = config
    emp.write_csv(args.out)
    print(f"wrote {args.out} (M={emp.M})")
    return EXIT_OK


def cmd_find_test(args) -> int:
    emp, p_hat, is_exact = _load_empirical(args.input, args.scale_M)
    mc = _model_from_args(args)
    if emp.T != mc.T:
        raise UsageError(f"input has T={emp.T} but the model class has T={mc.T}")
    config = {k: v for k, v in vars(args).items() if k != "func"}
    cert = handelman.find_witness(p_hat, mc, args.d_max)
    report = handelman.validate_certificate(cert, mc, p_hat, seed=args.seed)
    verdict = stats.distance_verdict(cert, emp, multiple=args.rejection_multiple)
    prefix = args.out_prefix
    cert_doc = cert.to_json()
    cert_doc["config"] = config
    _write_json(f"{prefix}.cert.json", cert_doc)
    _write_json(f"{prefix}.validation.json", {**report.to_json(), "config": config})
    _write_json(f"{prefix}.verdict.json", {**verdict.to_json(), "config": config})
    print(
        f"gamma={float(cert.gamma):.6g}  gamma/|c|={verdict.statistic:.6g}  "
        f"validated={report.valid}  decision={verdict.decision}"
    )
    if not report.valid:
        raise SolverError("certificate failed validation; see the validation report")
    return EXIT_OK


def cmd_check_equalities(args) -> int:
    emp, _, is_exact = _load_empirical(args.input, args.scale_M)
    if emp.T != 4:
        raise UsageError("the ready-made observables are defined for T=4")
    obs = equalities.CANNED_OBSERVABLES[args.observable]()
    verdict = stats.binomial_sign_test(emp, obs, args.alternative, args.alpha)
    doc = verdict.to_json()
    doc["config"] = {k: v for k, v in vars(args).items() if k != "func"}
    if is_exact:
        doc["note"] = f"exact input scaled to pseudo-counts with M={args.scale_M}"
    if args.out:
        _write_json(args.out, doc)
    print(
        f"<{args.observable}> = {verdict.statistic:.6g}  "
        f"log10 p = {verdict.log10_p:.4g}  decision={verdict.decision}"
    )
    return EXIT_OK


def cmd_jpe(args) -> int:
    emp, _, is_exact = _load_empirical(args.input, args.scale_M)
    report = exchangeability.jpe_test(emp, args.variant, args.alpha)
    doc = report.to_json()
    doc["config"] = {k: v for k, v in vars(args).items() if k != "func"}
    if is_exact:
        doc["note"] = f"exact input scaled to pseudo-counts with M={args.scale_M}"
    if args.out:
        _write_json(args.out, doc)
    violated = report.violated()
    print(
        f"variant {args.variant}: {report.n_pairs} equalities, "
        f"min adjusted p = {report.min_adjusted_p:.3g}, decision={report.decision}"
    )
    for rec in violated[:10]:
        print(f"  violated {rec['indices']} counts={rec['counts']} adj_p={rec['adjusted_p']:.3g}")
    if len(violated) > 10:
        print(f"  ... and {len(violated) - 10} more")
    return EXIT_OK


def cmd_certify(args) -> int:
    cert = handelman.Certificate.load(args.cert)
    p_hat = None
    if args.input:
        _, p_hat, _ = _load_empirical(args.input, args.scale_M)
    report = handelman.validate_certificate(cert, p_hat=p_hat, seed=args.seed)
    doc = report.to_json()
    doc["config"] = {k: v for k, v in vars(args).items() if k != "func"}
    if args.out:
        _write_json(args.out, doc)
    print(
        f"certificate {'VALID' if report.valid else 'INVALID'}: "
        f"residual={report.residual_max:.3g} worst_slack={report.worst_point_slack:.3g}"
    )
    return EXIT_OK if report.valid else EXIT_SOLVER


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contagion",
        description="Statistical tests for influence in dyadic action sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic data")
    p.add_argument("--model", required=True,
                   choices=["copying", "latent-homophily", "delayed", "instant"])
    p.add_argument("--M", type=int, default=400_000, help="sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=int, default=4)
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.5,
                   help="copy probability of the influence models")
    p.add_argument("--exact", action="store_true",
                   help="write the exact frequency vector instead of sampling")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("find-test", help="optimize a witness and issue a verdict")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-prefix", default="witness")
    p.add_argument("--d-max", type=int, default=6)
    p.add_argument("--T", type=int, default=4)
    p.add_argument("--delta-l", type=float, default=None)
    p.add_argument("--delta-u", type=float, default=None)
    p.add_argument("--rejection-multiple", type=float, default=3.0)
    p.add_argument("--scale-M", type=int, default=1_000_000,
                   help="pseudo-count scale for exact inputs")
    p.add_argument("--seed", type=int, default=0, help="seed for validation points")
    p.set_defaults(func=cmd_find_test)

    p = sub.add_parser("check-equalities", help="sign test of a ready-made observable")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--observable", choices=sorted(equalities.CANNED_OBSERVABLES), default="c1")
    p.add_argument("--alternative", choices=["two-sided", "greater", "less"],
                   default="two-sided")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--scale-M", type=int, default=1_000_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check_equalities)

    p = sub.add_parser("jpe", help="joint-symmetry equality report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--variant", type=int, choices=[1, 2, 3, 4], default=1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--scale-M", type=int, default=1_000_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_jpe)

    p = sub.add_parser("certify", help="re-validate a stored certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--in", dest="input", default=None)
    p.add_argument("--scale-M", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError, simulate.GenerationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except handelman.ResourceLimitError as err:
        print(f"resource limit: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
