"""
Spectral Averages - Command Line Front End

Uses Services layer for all numerical operations. Tables go to stdout (or
--output); diagnostics go to stderr.
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from core.config_manager import (FORMULAS, OUTPUT_FORMATS, SUITES, ConfigManager,
                                 create_example_config)
from core.errors import EXIT_INPUT, EXIT_OK, ConfigError, SpectralError, exit_code_for
from interfaces.weight_interface import WeightRegistry
from services import AverageService, ExportService, MeasureService, VerifyService

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")

    weight = common.add_argument_group("weight")
    weight.add_argument("--weight", help="Weight family (legendre, jacobi-like, "
                                         "gaussian-truncated, tabulated)")
    weight.add_argument("--Q", type=float, help="Truncation half-width of the Gaussian weight")
    weight.add_argument("--params", type=float, nargs="+", help="Family parameters")
    weight.add_argument("--support", type=float, nargs=2, metavar=("LO", "HI"))
    weight.add_argument("--nodes", type=int, help="Quadrature nodes (default 128)")
    weight.add_argument("--nmax", type=int, help="Highest recurrence degree")

    shift = common.add_argument_group("shift (complex values as re+imi)")
    shift.add_argument("--mu", nargs="+", help="Numerator points")
    shift.add_argument("--lambda", dest="lam", nargs="+", help="Second product points")
    shift.add_argument("--eps", nargs="+", help="Pole points")

    average = common.add_argument_group("average")
    average.add_argument("--formula", choices=FORMULAS)
    average.add_argument("--N", type=int, help="Matrix size")
    average.add_argument("--K", type=int, help="Declared number of mu points")
    average.add_argument("--M", type=int, help="Declared number of eps points")
    average.add_argument("--no-refine", dest="refine", action="store_false", default=None,
                         help="Skip the doubled-rule check of Cauchy transforms")

    output = common.add_argument_group("output")
    output.add_argument("--output", help="Output file (default stdout)")
    output.add_argument("--format", choices=OUTPUT_FORMATS)

    check = common.add_argument_group("oracle and verification")
    check.add_argument("--suite", choices=SUITES)
    check.add_argument("--seed", type=int)
    check.add_argument("--oracle-nodes", type=int)
    check.add_argument("--oracle-N", type=int)
    check.add_argument("--mc-samples", type=int)
    check.add_argument("--workers", type=int, help="Oracle threads (default min(8, cpus))")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="spectral-averages",
        description="Averages of characteristic polynomials over unitary ensembles",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("recurrence", parents=[common],
                        help="Recurrence coefficients (j, a, b, c_sq)")
    commands.add_parser("average", parents=[common], help="Evaluate one average formula")
    commands.add_parser("jacobi", parents=[common], help="Jacobi operator truncation")
    commands.add_parser("verify", parents=[common], help="Run verification suites")
    commands.add_parser("oracle", parents=[common], help="Brute-force and Monte Carlo estimates")
    init = commands.add_parser("init-config", help="Write an example configuration")
    init.add_argument("path", nargs="?", default="config.example.json")
    init.add_argument("-v", "--verbose", action="store_true")
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted config keys for every flag that was given."""
    params = args.params
    if args.Q is not None:
        params = [args.Q]
    return {
        "weight.family": args.weight,
        "weight.params": params,
        "weight.support": args.support,
        "weight.nodes": args.nodes,
        "recurrence.n_max": args.nmax,
        "shift.mu": args.mu,
        "shift.lambda": args.lam,
        "shift.eps": args.eps,
        "average.formula": args.formula,
        "average.N": args.N,
        "average.K": args.K,
        "average.M": args.M,
        "average.refine": args.refine,
        "output.path": args.output,
        "output.format": args.format,
        "oracle.nodes_per_dim": args.oracle_nodes,
        "oracle.N": args.oracle_N,
        "oracle.mc_samples": args.mc_samples,
        "oracle.seed": args.seed,
        "verify.suite": args.suite,
    }


def check_gaussian_width(config: ConfigManager, args: argparse.Namespace):
    """--Q only applies to the truncated Gaussian and replaces --params."""
    if args.Q is None:
        return
    if args.params is not None:
        raise ConfigError("--Q and --params are mutually exclusive", "weight.params")
    family = config.get("weight", "family")
    canonical = WeightRegistry.canonical(family) if isinstance(family, str) else None
    if canonical is not None and canonical != "gaussian-truncated":
        raise ConfigError(f"--Q applies to gaussian-truncated only, not {family!r}",
                          "weight.params")


def setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)


def _emit(config: ConfigManager, result: dict, key: str = "rows") -> int:
    if not result["success"]:
        print(f"error: {result['message']}", file=sys.stderr)
        return result["exit_code"]
    output = config.get_output()
    written = ExportService().write(result[key], result["columns"], output["format"],
                                    output["path"])
    if not written["success"]:
        print(f"error: {written['message']}", file=sys.stderr)
        return EXIT_INPUT
    logger.info(written["message"])
    return result["exit_code"]


def cmd_recurrence(config: ConfigManager, args: argparse.Namespace) -> int:
    return _emit(config, MeasureService(config).recurrence())


def cmd_average(config: ConfigManager, args: argparse.Namespace) -> int:
    return _emit(config, AverageService(config).compute(), key="records")


def cmd_jacobi(config: ConfigManager, args: argparse.Namespace) -> int:
    return _emit(config, MeasureService(config).jacobi())


def cmd_oracle(config: ConfigManager, args: argparse.Namespace) -> int:
    return _emit(config, AverageService(config).estimate(args.workers), key="records")


def cmd_verify(config: ConfigManager, args: argparse.Namespace) -> int:
    suite = config.get_suite()
    if suite == "none":
        suite = "all"
    result = VerifyService(config).run(suite, progress_callback=logger.info)
    if not result["rows"]:
        print(f"error: {result['message']}", file=sys.stderr)
        return result["exit_code"]
    output = config.get_output()
    ExportService().write(result["rows"], result["columns"], output["format"], output["path"])
    if not result["success"]:
        print(f"verification failed: {result['message']}", file=sys.stderr)
    return result["exit_code"]


def cmd_init_config(args: argparse.Namespace) -> int:
    create_example_config(args.path)
    print(f"example configuration written to {args.path}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "recurrence": cmd_recurrence,
    "average": cmd_average,
    "jacobi": cmd_jacobi,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    if args.command == "init-config":
        return cmd_init_config(args)

    try:
        config = ConfigManager(args.config)
        config.apply_overrides(collect_overrides(args))
        check_gaussian_width(config, args)
        return COMMANDS[args.command](config, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SpectralError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
