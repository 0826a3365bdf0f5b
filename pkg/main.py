"""
kummerpearson command line

    kummerpearson zonal --tau 2,1 --eigs 1,2
    kummerpearson verify pearson --a 1.5 --c 3 --b 2 --d 4 --eigs 0.3,0.5
    kummerpearson density figures.csv --N 5 --K 2 --mu 0,0,1,0,0,1,0,0 --s 6 --R 3
    kummerpearson simulate --N 5 --K 2 --mu ... --s 6 --R 3 --count 200 --seed 1 --out sim.csv
    kummerpearson fit sim.csv --N 5 --K 2 --s 6 --R 3

Results go to stdout as JSON (zonal prints a bare number), logs to stderr.
Exit codes: 0 success, 1 identity outside tolerance, 2 usage or input
format error, 3 numerical error.
"""

import argparse
import json
import logging
import math
import re
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from config import Config
from errors import KummerPearsonError, LandmarkFormatError, NonFiniteOutput
from kummer_relations import integral_representation_check, kummer_classic_check, pearson_relation_check
from landmark_io import read_landmark_files, read_matrix, write_landmarks
from models import (
    ConfigurationModel,
    Dataset,
    DensityForm,
    Partition,
    PearsonSeriesParams,
    RunConfig,
    SeriesResult,
    SpectralInput,
    TruncationPolicy,
    VerificationReport,
    VerifyKind,
)
from pearson_inference import ConfigurationLikelihood, fit_mu, simulate_configurations
from shape_configuration import ConfigurationBatch, configuration_from_landmarks, density_polynomial, density_series
from zonal_poly import zonal_eval

logger = logging.getLogger("kummerpearson")

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


# a comma list such as -0.4,0.3 that argparse would take for an option
_NEGATIVE_LIST = re.compile(r"^-\.?\d")


def attach_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite `--eigs -0.4,0.3` as `--eigs=-0.4,0.3`"""
    joined: List[str] = []
    for token in argv:
        previous = joined[-1] if joined else ""
        if previous.startswith("--") and previous != "--" and "=" not in previous and _NEGATIVE_LIST.match(token):
            joined[-1] = f"{previous}={token}"
        else:
            joined.append(token)
    return joined


def parse_floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def parse_ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _check_finite(value: Any, path: str = "") -> None:
    if isinstance(value, float) and not math.isfinite(value):
        raise NonFiniteOutput(f"non-finite value in output field {path or '<root>'}")
    if isinstance(value, dict):
        for key, item in value.items():
            _check_finite(item, f"{path}.{key}" if path else str(key))
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            _check_finite(item, f"{path}[{index}]")


def emit(record: Dict[str, Any]) -> None:
    _check_finite(record)
    print(json.dumps(record, sort_keys=True))


def _record(run: RunConfig, **fields: Any) -> Dict[str, Any]:
    record = {"schema": SCHEMA_VERSION, "command": run.command, "seed": run.seed,
              "parameters": run.parameters}
    if run.input_paths:
        record["input_paths"] = run.input_paths
    if run.output_path:
        record["output_path"] = run.output_path
    record.update(fields)
    return record


def _series_summary(result: Optional[SeriesResult]) -> Optional[Dict[str, Any]]:
    if result is None:
        return None
    return {
        "value": result.value,
        "degree_used": result.degree_used,
        "terminated_exactly": result.terminated_exactly,
        "converged": result.converged,
        "tail_estimate": result.tail_estimate,
        "term_count": result.term_count,
    }


def _policy(args: argparse.Namespace) -> TruncationPolicy:
    return TruncationPolicy.from_config(max_degree=getattr(args, "max_degree", None))


def _matrix_arg(values: Optional[List[float]], path: Optional[str], shape: tuple, name: str,
                default: np.ndarray) -> np.ndarray:
    if values is not None and path is not None:
        raise argparse.ArgumentTypeError(f"give either --{name} or --{name}-file, not both")
    if path is not None:
        matrix = read_matrix(path)
    elif values is not None:
        if len(values) != shape[0] * shape[1]:
            raise argparse.ArgumentTypeError(f"--{name} needs {shape[0] * shape[1]} values, got {len(values)}")
        matrix = np.array(values, dtype=float).reshape(shape)
    else:
        return default
    if matrix.shape != shape:
        raise argparse.ArgumentTypeError(f"{name} must be {shape[0]}x{shape[1]}, got {matrix.shape}")
    return matrix


def _model(args: argparse.Namespace) -> ConfigurationModel:
    N, K = args.N, args.K
    mu = _matrix_arg(args.mu, args.mu_file, (N - 1, K), "mu", np.zeros((N - 1, K)))
    Sigma = _matrix_arg(None, args.sigma_file, (N - 1, N - 1), "sigma", np.eye(N - 1))
    return ConfigurationModel(N=N, K=K, mu=mu, Sigma=Sigma, s=args.s, R=args.R)


def _dataset(paths: Sequence[str], N: int, K: int) -> Dataset:
    figures = read_landmark_files(paths, shape=(N, K))
    return Dataset(N=N, K=K, configurations=[configuration_from_landmarks(f) for f in figures])


def cmd_zonal(args: argparse.Namespace) -> int:
    value = zonal_eval(Partition(parts=args.tau), SpectralInput(eigenvalues=args.eigs))
    if not math.isfinite(value):
        raise NonFiniteOutput("zonal polynomial value is not finite")
    print(format(value, ".17g"))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    kind = VerifyKind(args.kind)
    x = SpectralInput(eigenvalues=args.eigs)
    policy = _policy(args)
    tolerance = Config.VERIFY_TOLERANCE if args.tolerance is None else args.tolerance
    run = RunConfig(command="verify", seed=args.seed if kind == VerifyKind.INTEGRAL else None, policy=policy,
                    parameters={"kind": kind.value, "a": args.a, "c": args.c, "b": args.b, "d": args.d,
                                "eigenvalues": list(x.eigenvalues), "tolerance": tolerance})

    if kind == VerifyKind.KUMMER:
        report = kummer_classic_check(args.a, args.c, x, policy)
    else:
        if args.b is None or args.d is None:
            raise argparse.ArgumentTypeError(f"verify {kind.value} needs --b and --d")
        params = PearsonSeriesParams(a=args.a, c=args.c, b=args.b, d=args.d)
        if kind == VerifyKind.PEARSON:
            report = pearson_relation_check(params, x, policy)
        else:
            report = integral_representation_check(params, x, args.samples, args.seed, policy)

    passed = report.within(tolerance)
    emit(_record(run, **_report_fields(report), passed=passed))
    return EXIT_OK if passed else EXIT_TOLERANCE


def _report_fields(report: VerificationReport) -> Dict[str, Any]:
    return {
        "lhs": report.lhs,
        "rhs": report.rhs,
        "abs_diff": report.abs_diff,
        "rel_diff": report.rel_diff,
        "tail_estimate": report.tail_estimate,
        "standard_error": report.standard_error,
        "lhs_series": _series_summary(report.lhs_diagnostics),
        "rhs_series": _series_summary(report.rhs_diagnostics),
    }


def cmd_density(args: argparse.Namespace) -> int:
    model = _model(args)
    form = DensityForm(args.form)
    policy = _policy(args)
    data = _dataset(args.files, args.N, args.K)
    run = RunConfig(command="density", input_paths=list(args.files), policy=policy,
                    parameters={"N": args.N, "K": args.K, "s": args.s, "R": args.R, "form": form.value,
                                "mu": model.mu.tolist()})

    figures = []
    if len(data):
        batch = ConfigurationBatch(data.configurations, model.Sigma).params(model)
        for index in range(len(batch)):
            params = batch.item(index)
            if form == DensityForm.POLYNOMIAL:
                result = density_polynomial(params, args.N, args.K, policy)
            else:
                result = density_series(params, policy)
            figures.append({
                "index": index,
                "density": result.value,
                "log_density": result.log_value.log_magnitude,
                "degree_used": result.degree_used,
                "terminated_exactly": result.terminated_exactly,
                "trace_x": params.x.trace,
            })
    total = math.fsum(f["log_density"] for f in figures)
    emit(_record(run, figures=figures, loglik=total, count=len(figures)))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _model(args)
    figures, _ = simulate_configurations(model, args.count, args.seed)
    write_landmarks(args.out, figures)
    run = RunConfig(command="simulate", seed=args.seed, output_path=args.out,
                    parameters={"N": args.N, "K": args.K, "s": args.s, "R": args.R, "count": args.count,
                                "mu": model.mu.tolist()})
    emit(_record(run, count=len(figures)))
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    N, K = args.N, args.K
    Sigma = _matrix_arg(None, args.sigma_file, (N - 1, N - 1), "sigma", np.eye(N - 1))
    if args.init is not None:
        init = _matrix_arg(args.init, None, (N - 1, K), "init", None)
    elif args.seed is not None:
        init = np.random.default_rng(args.seed).standard_normal((N - 1, K))
    else:
        init = np.zeros((N - 1, K))
    data = _dataset(args.files, N, K)
    run = RunConfig(command="fit", seed=args.seed, input_paths=list(args.files),
                    parameters={"N": N, "K": K, "s": args.s, "R": args.R, "budget": args.budget,
                                "init": init.tolist()})

    start = ConfigurationLikelihood(data, Sigma, args.s, args.R)(init)
    result = fit_mu(data, Sigma, args.s, args.R, init=init, budget=args.budget)
    emit(_record(
        run,
        mu_hat=result.mu_hat.tolist(),
        loglik=result.loglik,
        loglik_init=start,
        iterations=result.iterations,
        evaluations=result.evaluations,
        converged=result.converged,
        count=len(data),
    ))
    return EXIT_OK


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, required=True, help="landmarks per figure")
    parser.add_argument("--K", type=int, required=True, help="dimensions")
    parser.add_argument("--s", type=float, required=True, help="Pearson VII power, s > K(N-1)/2")
    parser.add_argument("--R", type=float, required=True, help="Pearson VII scale, R > 0")
    parser.add_argument("--sigma-file", dest="sigma_file", help="CSV of the (N-1)x(N-1) scale matrix (default I)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kummerpearson",
                                     description="Matrix-argument 1P1 series and Pearson VII configuration densities")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    zonal = commands.add_parser("zonal", help="evaluate a zonal polynomial")
    zonal.add_argument("--tau", type=parse_ints, required=True, help="partition, e.g. 2,1")
    zonal.add_argument("--eigs", type=parse_floats, required=True, help="eigenvalues, e.g. 1,2")
    zonal.set_defaults(handler=cmd_zonal)

    verify = commands.add_parser("verify", help="check an identity numerically")
    verify.add_argument("kind", choices=[k.value for k in VerifyKind])
    verify.add_argument("--a", type=float, required=True)
    verify.add_argument("--c", type=float, required=True)
    verify.add_argument("--b", type=float)
    verify.add_argument("--d", type=float)
    verify.add_argument("--eigs", type=parse_floats, required=True)
    verify.add_argument("--samples", type=int, default=100000, help="Monte Carlo draws (integral)")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--max-degree", dest="max_degree", type=int)
    verify.add_argument("--tolerance", type=float)
    verify.set_defaults(handler=cmd_verify)

    density = commands.add_parser("density", help="configuration densities of landmark figures")
    density.add_argument("files", nargs="+")
    _add_model_args(density)
    density.add_argument("--mu", type=parse_floats, help="(N-1)*K values, row-major")
    density.add_argument("--mu-file", dest="mu_file")
    density.add_argument("--form", choices=[f.value for f in DensityForm], default=DensityForm.SERIES.value)
    density.add_argument("--max-degree", dest="max_degree", type=int)
    density.set_defaults(handler=cmd_density)

    simulate = commands.add_parser("simulate", help="draw landmark figures from the Pearson VII model")
    _add_model_args(simulate)
    simulate.add_argument("--mu", type=parse_floats)
    simulate.add_argument("--mu-file", dest="mu_file")
    simulate.add_argument("--count", type=int, required=True)
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--out", required=True)
    simulate.set_defaults(handler=cmd_simulate)

    fit = commands.add_parser("fit", help="maximum likelihood location from landmark figures")
    fit.add_argument("files", nargs="+")
    _add_model_args(fit)
    fit.add_argument("--init", type=parse_floats, help="(N-1)*K starting values, row-major")
    fit.add_argument("--budget", type=int, default=Config.FIT_BUDGET)
    fit.add_argument("--seed", type=int, help="random start when --init is not given")
    fit.set_defaults(handler=cmd_fit)

    return parser


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, Config.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    args = parser.parse_args(attach_negative_values(argv))
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except (argparse.ArgumentTypeError, LandmarkFormatError, ValidationError) as e:
        logger.error("%s", e)
        print(f"kummerpearson {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (KummerPearsonError, np.linalg.LinAlgError, OverflowError, ZeroDivisionError) as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"kummerpearson {args.command}: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
