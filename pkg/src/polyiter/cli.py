"""Command-line front end.

Exit codes: 0 ok, 1 invalid instance, 2 usage or parse error, 3 certificate
violation, 4 hypothesis violation (not contracting, no renewal state,
multichain), 5 enumeration overflow. States are numbered from 1 on the
command line and in sidecar files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .errors import (
    CombinatorialOverflow,
    InstanceFormatError,
    InvalidInstance,
    MultichainDetected,
    NoRenewalState,
    NotContracting,
    RadiusNotDominated,
)
from .fileformat import dumps_instance, load_instance
from .game import GameInstance, PayoffMode, check_valid, validate
from .generate import Family, GeneratorSpec, generate
from .perron import (
    RadiusMode,
    collatz_wielandt_vector,
    family_from_instance,
    hull_spectral_radius,
    mean_return_times,
)
from .policy_iteration import (
    Provenance,
    SolverConfig,
    bound_report,
    certify_discounted_run,
    certify_mean_run,
    discounted_bound,
    mean_bound,
    solve_discounted,
    solve_mean,
    trace_to_dict,
)
from .transforms import (
    TransformKind,
    TransformRecord,
    mean_to_discounted,
    scale_instance,
    verify_contraction,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_CERT, EXIT_HYPOTHESIS, EXIT_OVERFLOW = range(6)


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1))


def _load_valid(path) -> GameInstance:
    instance = load_instance(path)
    check_valid(instance)
    return instance


def _state(instance: GameInstance, c: int | None, required: bool) -> int | None:
    if c is None:
        if required:
            raise UsageError("--renewal-state is required for mean-payoff instances")
        return None
    if not 1 <= c <= instance.n:
        raise UsageError(f"state {c} outside 1..{instance.n}")
    return c - 1


def _names_min(instance, sigma):
    return [instance.min_actions[i][a] for i, a in enumerate(sigma)]


def _names_max(instance, delta):
    return [[instance.max_actions[i][a][b] for a, b in enumerate(row)] for i, row in enumerate(delta)]


def _read_start(instance: GameInstance, path: str) -> SolverConfig:
    data = json.loads(Path(path).read_text())
    try:
        sigma = tuple(instance.min_actions[i].index(name) for i, name in enumerate(data["min_policy"]))
        delta = None
        if "max_policy" in data:
            delta = tuple(
                tuple(instance.max_actions[i][a].index(name) for a, name in enumerate(row))
                for i, row in enumerate(data["max_policy"])
            )
    except (KeyError, ValueError, IndexError) as exc:
        raise InstanceFormatError(f"bad start policy file: {exc!r}") from exc
    if len(sigma) != instance.n or (delta is not None and len(delta) != instance.n):
        raise InstanceFormatError("start policy length does not match the instance")
    return SolverConfig(initial_min=sigma, initial_max=delta)


def cmd_validate(args) -> int:
    report = validate(load_instance(args.file))
    print(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_solve(args) -> int:
    instance = _load_valid(args.file)
    mean = instance.payoff == PayoffMode.MEAN
    c = _state(instance, args.renewal_state, required=mean)
    cfg = SolverConfig()
    if args.start_policy not in (None, "first"):
        cfg = _read_start(instance, args.start_policy)
    if mean:
        result = solve_mean(instance, c, cfg)
        report = mean_bound(instance, result.return_times)
        out = {"eta": result.eigenpair.eta, "bias": [float(x) for x in result.eigenpair.bias]}
    else:
        report = discounted_bound(instance)
        cfg = SolverConfig(cfg.improvement, cfg.initial_min, cfg.initial_max, force=True)
        result = solve_discounted(instance, cfg)
        out = {"value": [float(x) for x in result.value]}
    trace = result.trace
    out.update(
        min_policy=_names_min(instance, result.min_policy),
        max_policy=_names_max(instance, result.max_policy),
        outer_iterations=len(trace.outer),
        stop_index=trace.stop_index,
        bound=report.k_max_thm3,
        **{"lambda": report.lambda_used},
        provenance=report.provenance.value,
    )
    if mean:
        out["K"] = result.return_times.K
    if args.trace:
        Path(args.trace).write_text(json.dumps(trace_to_dict(trace), indent=1) + "\n")
    status = EXIT_OK
    if args.certify:
        cert = certify_mean_run(instance, result) if mean else certify_discounted_run(instance, result, report)
        out["certificate"] = cert.to_dict()
        if not cert.passed or trace.stop_index > report.k_max_thm3:
            status = EXIT_CERT
    _emit(out)
    return status


def cmd_bound(args) -> int:
    instance = _load_valid(args.file)
    if args.lam is not None:
        report = bound_report(instance, args.lam, Provenance.GIVEN_LAMBDA)
    elif args.return_times is not None:
        c = _state(instance, args.return_times, required=True)
        report = mean_bound(instance, mean_return_times(family_from_instance(instance), c))
    elif args.spectral:
        report = discounted_bound(instance)
        if report.provenance == Provenance.GIVEN_LAMBDA:
            omega = hull_spectral_radius(family_from_instance(instance))
            report = bound_report(instance, omega, Provenance.SPECTRAL_OMEGA)
    elif instance.payoff == PayoffMode.MEAN:
        raise UsageError("mean-payoff instances need --return-times c or --lambda")
    else:
        report = discounted_bound(instance)
    _emit(report.to_dict())
    return EXIT_OK


def _sidecar_path(output: str) -> Path:
    p = Path(output)
    return p.with_name(p.stem + ".sidecar.json")


def cmd_transform(args) -> int:
    instance = _load_valid(args.file)
    if args.mean is not None:
        if instance.payoff != PayoffMode.MEAN:
            raise UsageError("--mean needs a mean-payoff instance")
        c = _state(instance, args.mean, required=True)
        times = mean_return_times(family_from_instance(instance), c)
        out = mean_to_discounted(instance, c, times.phi)
        record = TransformRecord(TransformKind.MEAN, times.phi, times.lam, c)
    elif args.scale_auto is not None:
        family = family_from_instance(instance)
        try:
            phi = collatz_wielandt_vector(family, args.scale_auto)
        except RadiusNotDominated as exc:
            omega = hull_spectral_radius(family, RadiusMode.BINARY_SEARCH)
            raise RadiusNotDominated(f"{exc}; hull spectral radius is {omega!r}") from None
        out = scale_instance(instance, phi)
        record = TransformRecord(TransformKind.SCALING, phi, args.scale_auto)
    else:
        data = json.loads(Path(args.scale_phi).read_text())
        phi = np.asarray(data["phi"] if isinstance(data, dict) else data, dtype=float)
        out = scale_instance(instance, phi)
        record = TransformRecord(TransformKind.SCALING, phi, out.max_row_sum())
    cert = verify_contraction(out, record.lam)
    Path(args.output).write_text(dumps_instance(out))
    sidecar = record.to_dict()
    _sidecar_path(args.output).write_text(json.dumps(sidecar, indent=1) + "\n")
    _emit({**sidecar, "max_row_sum": cert.worst_sum, "contraction_verified": cert.passed})
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = _load_valid(args.file)
    if instance.payoff == PayoffMode.MEAN:
        c = _state(instance, args.renewal_state, required=True)
        pair = oracle.brute_force_mean(instance, c)
        _emit({"eta": pair.eta, "bias": [float(x) for x in pair.bias]})
    else:
        _emit({"value": [float(x) for x in oracle.brute_force_discounted(instance)]})
    return EXIT_OK


def cmd_generate(args) -> int:
    family = Family(args.family)
    param = {Family.SUBSTOCHASTIC: args.lam, Family.STATE_DISCOUNT: args.rho_cap, Family.RENEWAL_MEAN: args.p_min}[family]
    if param is None:
        flag = {Family.SUBSTOCHASTIC: "--lam", Family.STATE_DISCOUNT: "--rho-cap", Family.RENEWAL_MEAN: "--p-min"}[family]
        raise UsageError(f"{flag} is required for family {family.value}")
    try:
        spec = GeneratorSpec(args.n, args.a_max, args.b_max, args.seed, family, param, args.renewal_state - 1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    Path(args.output).write_text(dumps_instance(generate(spec)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyiter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="run policy iteration")
    p.add_argument("file")
    p.add_argument("--renewal-state", type=int, metavar="C")
    p.add_argument("--start-policy", default="first", metavar="first|FILE")
    p.add_argument("--trace", metavar="OUT.json")
    p.add_argument("--certify", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bound", help="iteration bounds")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--spectral", action="store_true")
    g.add_argument("--return-times", type=int, metavar="C")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("transform", help="scaling or mean-payoff reduction")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scale-auto", type=float, metavar="LAMBDA")
    g.add_argument("--scale-phi", metavar="PHI.json")
    g.add_argument("--mean", type=int, metavar="C")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("oracle", help="brute-force solution")
    p.add_argument("file")
    p.add_argument("--renewal-state", type=int, metavar="C")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("generate", help="seeded random instance")
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a-max", type=int, default=2)
    p.add_argument("--b-max", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=float)
    p.add_argument("--rho-cap", type=float)
    p.add_argument("--p-min", type=float)
    p.add_argument("--renewal-state", type=int, default=1, metavar="C")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInstance as exc:
        print(exc.report, file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, InstanceFormatError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotContracting, NoRenewalState, MultichainDetected, RadiusNotDominated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except CombinatorialOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":
    sys.exit(main())
